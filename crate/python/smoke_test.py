"""Smoke test for the lorentz_wall extension module.

Build and copy the module next to this file, then run it:

    cargo build --release -p lorentz-py --features extension-module
    cp target/release/liblorentz_wall.so python/lorentz_wall.so
    python3 python/smoke_test.py
"""

import math

import lorentz_wall as lw


def check_geometry():
    lattice = lw.Lattice.reference()
    assert lattice.disks == [(0.0, 0.0, 0.4), (0.5, 0.5, 0.2)]
    assert lattice.wall_components() == [(0.4, 0.6)]
    # from the wall midpoint straight right to the small disk at (0.5, 0.5)
    assert abs(lattice.cast_ray((0.0, 0.5), (1.0, 0.0), 2.0) - 0.3) < 1e-12
    assert lw.reflect((1.0, -1.0), (0.0, 1.0)) == (1.0, 1.0)
    try:
        lw.Lattice([(0.0, 0.0, -1.0)])
    except ValueError:
        pass
    else:
        raise AssertionError("negative radius accepted")


def check_billiard():
    cfg = lw.LorentzConfig.reference()
    assert abs(cfg.c1 - 0.2) < 1e-12
    assert cfg.max_free_path == lw.REFERENCE_MAX_FREE_PATH
    sched = lw.HoleSchedule("shrinking", "inv_sqrt", c=0.15)
    a = lw.run_trajectory(cfg, sched, 2000, seed=7)
    b = lw.run_trajectory(cfg, sched, 2000, seed=7)
    assert len(a) == 2000 and a.position == b.position
    free = lw.run_trajectory(cfg, lw.HoleSchedule.no_wall(), 2000, seed=7)
    assert [abs(x) for x in free.position] == [abs(x) for x in a.position]
    assert all(a.l[k] == a.l[k - 1] + 1 for k in a.crossing_steps)
    ends = lw.run_endpoints(cfg, sched, 500, 40, seed=1)
    assert len(ends) == 40
    sigma = lw.estimate_sigma([e[0] for e in ends], 500)
    assert 0.1 < sigma < 0.5, sigma


def check_walk():
    sched = lw.HoleSchedule("shrinking", "inv_sqrt", c=1.0)
    walk = lw.run_walk(sched, 10_000, seed=5)
    assert walk.alpha[-1] == 0.01
    assert abs(walk.position[0]) == 1.0
    assert all(abs(walk.position[k] - walk.position[k - 1]) == 1.0 for k in range(1, 10_001)
               if walk.position[k - 1] != 0.0)


def check_exact_formulas():
    assert lw.chain_plus_probability([0.5]) == 0.5
    assert lw.chain_plus_probability([1.0, 1.0]) == 1.0
    tv, bound = lw.le_cam_bound([0.01] * 100)
    assert 0.0 <= tv <= bound
    assert abs(bound - 2 * 100 * 0.01**2) < 1e-15
    assert abs(lw.gaussian_marginal_cdf(1.0, 1.0, 1.96) - 0.9750021048517795) < 1e-11
    # a bridge from 0 accumulates positive local time immediately
    assert abs(lw.bridge_local_time_tail(0.0, 0.0, 0.0, 1.0, 1.0, 0.0) - 1.0) < 1e-12
    tails = [lw.bridge_local_time_tail(0.3, -0.2, 0.0, 1.0, 1.0, y) for y in (0.0, 0.5, 1.0)]
    assert tails[0] >= tails[1] >= tails[2] >= 0.0


def check_limits():
    t, x = lw.sample_qrbm(1000, 1.0, 1.0, seed=3)
    assert len(t) == len(x) == 1001 and t[0] == 0.0 and t[-1] == 1.0
    t, x = lw.sample_big_qrbm(1000, 1.0, 1.0, seed=3, t0=0.05)
    assert len(x) == 1001
    # the modulus of the quasi-reflected path is the same Brownian motion
    t2, y = lw.sample_big_qrbm(1000, 0.0, 1.0, seed=3, t0=0.05)
    assert [abs(v) for v in x] == [abs(v) for v in y]


def check_ks():
    ends = [lw.sample_qrbm(1000, 1.0, 1.0, seed=11, index=i)[1][-1] for i in range(300)]
    phi = lambda z: 0.5 * math.erfc(-z / math.sqrt(2.0))
    report = lw.ks_one_sample([abs(v) for v in ends], lambda z: max(0.0, 2.0 * phi(z) - 1.0), 0.1)
    assert report.passed, report
    same = lw.ks_two_sample(ends, ends, 0.0)
    assert same.statistic == 0.0 and same.passed
    try:
        lw.ks_one_sample(ends, lambda z: "nope", 0.1)
    except TypeError:
        pass
    else:
        raise AssertionError("bad cdf accepted")


def main():
    check_geometry()
    check_billiard()
    check_walk()
    check_exact_formulas()
    check_limits()
    check_ks()
    print("smoke test passed")


if __name__ == "__main__":
    main()
