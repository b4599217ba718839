"""
ABC on the raw series with sample-based discrepancies
=====================================================

"""

# Instead of summarising, treat the T observations as a sample from a
# marginal distribution and compare samples directly.
from robustsbi import AbcConfig, RngStream, SvParams, UniformPrior, rejection_abc
from robustsbi.models import BENCHMARK_SV, simulate_sv

y = simulate_sv(SvParams(*BENCHMARK_SV), 100, RngStream(11))

# Matching the acceptance quantile gives every discrepancy the same number
# of accepted draws, so their spreads can be compared directly.
for kind in ("euclidean", "mmd", "kl", "wasserstein", "cvm"):
    cfg = AbcConfig(num_sims=5_000, quantile=0.02, mode="full", discrepancy=kind)
    post = rejection_abc(cfg, y, UniformPrior(), RngStream(11, 1)).accepted_thetas[:, 0]
    print(f"{kind:12s} n={post.size:4d} mean={post.mean():+.3f} std={post.std():.3f}")
