"""Quick check that the extension imports and its main entry points agree with each other."""

import math

import hybridnet as hn


def main():
    s = hn.SystemParams()
    assert s.alpha == 4.0 and s.k == 8

    # Closed forms.
    assert abs(hn.mean_power_isotropic(1.0, 1.0, 1.0, 3.0) - 3 * math.pi) < 1e-9
    assert abs(hn.upper_incomplete_gamma(-0.5, 1.0) - 0.178148) < 1e-6
    assert 0 < hn.psi(0.5, 1.5, 3.0) < hn.mean_power_isotropic(1.0, 0.5, 1.5, 3.0)
    same = hn.mean_power_directed(2.0, 0.5, 1.5, 3.0, 1.0, 1.0)
    assert same == hn.mean_power_isotropic(2.0, 0.5, 1.5, 3.0)

    # Boundaries and membership.
    grid = [0.1, 1.0, 10.0]
    cell = hn.trace_boundary(s, 3.8, grid)
    assert abs(math.log(cell[2] / cell[1]) / math.log(10.0) + s.alpha / 2) < 1e-10
    d = hn.DeploymentParams(cell[1] * 1.01, 50.0, 1.0, 0.0)
    assert hn.region_contains(s, d, 3.8)
    need = hn.hybrid_min_pb_density(1.0, 50.0, s, 3.8, "directed", "large")
    assert need is not None and need > 0

    # Monte Carlo.
    r = hn.sample_realization(hn.DeploymentParams(1.0, 1.0, 1.0, 0.5), seed=7, truncation_factor=10.0)
    assert r["bs_points"][0] == (0.0, 0.0) and len(r["mobiles"]) == len(r["bs_points"])
    zero = hn.estimate_outage(s, hn.DeploymentParams(0.0, 1.0, 1.0, 0.0), trials=50, seed=1)
    assert zero.value == 1.0
    e1 = hn.estimate_mean_raw_power(s, hn.DeploymentParams(1.0, 1.0, 1.0, 1.0), "isotropic", 2000, 3)
    e2 = hn.estimate_mean_raw_power(s, hn.DeploymentParams(1.0, 1.0, 1.0, 1.0), "isotropic", 2000, 3)
    assert e1.value == e2.value
    exact = hn.mean_power_isotropic(1.0, 1.0, s.nu, s.beta)
    assert abs(e1.value - exact) < 5 * e1.stderr
    stat = hn.OutageStatistic(s, trials=2000, seed=5, truncation_factor=10.0)
    mu, (lo, hi) = stat.mu_for(0.3)
    assert lo <= mu <= hi and abs(stat.epsilon_at(mu).value - 0.3) < 0.01

    try:
        hn.SystemParams(alpha=1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("alpha <= 2 accepted")

    print(f"hybridnet {hn.__version__} smoke test passed (mu(0.3) ~ {mu:.2f} from 2000 trials)")


if __name__ == "__main__":
    main()
