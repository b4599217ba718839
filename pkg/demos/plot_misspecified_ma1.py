"""
Fitting an MA(1) model to stochastic-volatility data
====================================================

"""

# The data come from a stochastic-volatility process, but we insist on
# describing them with a first-order moving average.  No MA(1) coefficient
# can reproduce the observed autocovariances.
from robustsbi import AbcConfig, RngStream, SvParams, UniformPrior, rejection_abc
from robustsbi.discrepancies import euclidean
from robustsbi.models import BENCHMARK_SV, simulate_sv
from robustsbi.summaries import autocov_summaries, binding_ma1, binding_star_sv, epsilon_star, theta_grid

params = SvParams(*BENCHMARK_SV)
y = simulate_sv(params, 100, RngStream(2024))
print("observed summaries:", autocov_summaries(y))

# Under MA(1), the lag-0 autocovariance is 1 + theta^2, which never drops
# below one.  The SV process has a tiny second moment instead.
b_star = binding_star_sv(params)
print("expected SV summaries:", b_star)

# The gap between the two binding functions is the incompatibility.  Its
# minimiser is the pseudo-true value that ABC should home in on.
report = epsilon_star(b_star, binding_ma1, theta_grid(), euclidean)
print(f"pseudo-true theta = {report.theta_star:+.4f}, incompatibility = {report.epsilon_star:.5f}")

# Rejection ABC keeps every draw, so one run gives all the tolerances.
run = rejection_abc(AbcConfig(num_sims=200_000), y, UniformPrior(), RngStream(2024, 1))
for q in (0.1, 0.01, 0.001):
    post = run.at_quantile(q).accepted_thetas[:, 0]
    print(f"quantile {q:>6}: n={post.size:6d} mean={post.mean():+.3f} std={post.std():.3f}")
