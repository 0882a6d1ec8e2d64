# %% [markdown]
# # Two recurrences and where they meet
#
# k-Pell numbers grow like powers of a root close to phi^2, Narayana's cows
# numbers like powers of alpha ~ 1.4656. This script looks at both sequences,
# the certified constants behind them, and the handful of values they share.

# %%
from pellnarayana.algebraic import AlgebraicContext, certified_context
from pellnarayana.search import intersect_merge
from pellnarayana.sequences import fibonacci, kpell, narayana, narayana_binet

for k in (2, 3, 4, 10):
    print(f"k={k:>2}:", [kpell(k, n) for n in range(1, 11)])
print("Narayana:", [narayana(m) for m in range(16)])

# %% [markdown]
# For n <= k + 1 a k-Pell number is an odd-indexed Fibonacci number.

# %%
k = 10
print([kpell(k, n) == fibonacci(2 * n - 1) for n in range(1, k + 3)])

# %% [markdown]
# The dominant roots are balls with a certified radius, not floats.

# %%
base = AlgebraicContext.build(None)
print("alpha  ", base.alpha.decimal(25))
print("|beta| ", base.beta_modulus.decimal(25))
print("C_alpha", base.c_alpha.decimal(25))
for k in (2, 4, 60, 360):
    ctx = certified_context(k)
    print(f"gamma({k}) = {ctx.gamma.decimal(20)}   g_k = {ctx.g_k_gamma.decimal(12)}   bits = {ctx.prec}")

# %% [markdown]
# With the initial values 1, 1, 1 the dominant-term formula for N_m carries
# the power alpha^(m+3); rounding it recovers every term.

# %%
print(all(narayana_binet(m, base) == narayana(m) for m in range(1, 200)))

# %% [markdown]
# A two-pointer merge of the sequences shows the coincidences directly.

# %%
for k in (2, 3, 4, 5):
    print(k, [(r.n, r.m, r.value, r.kind.value) for r in intersect_merge(k, 100, 300)])
