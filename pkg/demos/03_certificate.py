# %% [markdown]
# # A certificate you can check later
#
# The full replay writes every bound and search result to canonical JSON.
# Reloading it and re-running the checks needs no trust in the original run.

# %%
import collections
import tempfile
from pathlib import Path

from pellnarayana.pipeline import RunConfig, load_certificate, validate_certificate, verify_theorem

path = Path(tempfile.mkdtemp()) / "certificate.json"
cert = verify_theorem(RunConfig(output=str(path)))
print("theorem holds:", cert.verdict)
print("largest small-k bound:", cert.data["small_k_max_bound"])
print("large-k chain ends at k <=", cert.data["large_k"]["final_k_bound"])
print("certificate size:", path.stat().st_size, "bytes")

# %%
kinds = collections.Counter(r["kind"] for r in cert.data["search"]["records"])
print(dict(kinds))
print("outside the families:", [r for r in cert.data["search"]["records"] if r["kind"] == "Exceptional"])

# %%
again = load_certificate(path)
print("byte-identical:", again.to_json() == path.read_text())
print("problems found on reload:", validate_certificate(again))

# %% [markdown]
# Corrupt one recorded number and the validator notices.

# %%
again.data["small_k"][40]["q"] = str(int(again.data["small_k"][40]["q"]) + 2)
print(validate_certificate(again))
