# %% [markdown]
# # Shrinking astronomical bounds with continued fractions
#
# Linear forms in logarithms give bounds like n < 10^112. The reduction step
# turns them into something a loop can cover: pick a convergent denominator
# q > 6M of tau, measure eps = ||mu q|| - M ||tau q||, and when eps > 0 every
# solution has t < log(Aq/eps) / log C.

# %%
from fractions import Fraction

from pellnarayana.certreal import CertReal, constant
from pellnarayana.linforms import index_bounds, replay_large_k_bound
from pellnarayana.reduction import ReductionInstance, dujella_petho, large_k_chain, small_k_reduce

toy = ReductionInstance(
    tau=lambda prec: CertReal.exact(2, prec).sqrt(),
    mu=constant(Fraction(1, 2)),
    A=constant(10),
    C=constant(2),
    M=10,
)
out = dujella_petho(toy)
print(f"q={out.q} (convergent {out.convergent_index}, attempt {out.attempts})")
print(f"eps = {out.epsilon.decimal(12)}, t < {out.t_bound.decimal(12)}")

# %% [markdown]
# The first denominator above 60 is 70, but there eps is negative; the next one works.
# Small k: each k from 2 to 360 gets its own instance.

# %%
for k in (2, 4, 100, 360):
    r = small_k_reduce(k)
    print(f"k={k:>3}  M={index_bounds(k)[1]:.3e}  q has {len(str(r.q))} digits  t <= {r.t_max}")

# %% [markdown]
# Large k: three passes, each feeding the next.

# %%
k0 = replay_large_k_bound().integers["k_max"]
print(f"starting from k < {k0:.4e}")
for i, stage in enumerate(large_k_chain(k0).stages, 1):
    o = stage.outcome
    print(f"stage {i}: convergent {o.convergent_index:>3}, t < {o.t_bound.decimal(8)}, k <= {stage.k_out}")
