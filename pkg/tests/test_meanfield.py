import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omtopo.meanfield import (CouplingEquality, DivergenceError, SteadyStateError,
                              SteadyStateMethod, calibrate_g, default_dt,
                              find_steady_state_fixed_point, find_steady_state_ode, integrate,
                              rhs, trajectory_to_csv)
from omtopo.model import (CELL_CHAIN, DriveProtocol, LatticeSpec, MeanFieldState,
                          SpecError, effective_chain)
from omtopo.scenarios import scenario, set_spec_param

W = 1e5

# fixed-point amplitudes computed once with this package and cross-checked
# against an independent adaptive integration (relative agreement < 1e-9)
FROZEN_FP = {
    "fig2a": ([99782.37272474, 102093.11012881], [466.48122919, 10423.00313564]),
    "fig7": ([99876.20650438, 99851.76684601], [4.88128344, 9970.37534], None),
    "fig8": ([101693.22380519, 37153.22692061], [8961.14949717, 3778.74171576]),
    "fig5": ([17855.97772654, 171354.38791123], [148702.67041536, 29362.32625607]),
    "fig6": ([96915.95473573, 99511.53272341, 101988.65633271], None),
}


def linear_spec(delta=1.0, kappa=0.1, omega=W):
    # one cavity + one resonator with negligible coupling: closed-form response
    return LatticeSpec(topology=CELL_CHAIN, n=1, delta_a=(delta,), omega_b=(1.0,),
                       g=(1e-30,), kappa=(kappa,), gamma=(1e-5,),
                       drive=(DriveProtocol.constant(omega),))


class TestRhs:
    def test_matches_two_cell_equations(self, rng):
        # hand-coded Eq.-(5)-style derivatives for a random state
        spec = scenario("fig2a").spec
        alpha = rng.normal(size=2) * 1e4 + 1j * rng.normal(size=2) * 1e4
        beta = rng.normal(size=2) * 1e3 + 1j * rng.normal(size=2) * 1e3
        state = MeanFieldState(t=0.0, alpha=alpha, beta=beta)
        g1, g2 = spec.g
        k1, k2 = spec.kappa
        gam = spec.gamma
        da1 = -1j * (1.0 - g1 * (beta[0] + beta[0].conj())) * alpha[0] - 1j * W - 0.5 * k1 * alpha[0]
        db1 = -1j * (beta[0] - g1 * abs(alpha[0]) ** 2 + g1 * abs(alpha[1]) ** 2) - 0.5 * gam[0] * beta[0]
        da2 = (-1j * (1.0 + g1 * (beta[0] + beta[0].conj()) - g2 * (beta[1] + beta[1].conj())) * alpha[1]
               - 1j * W - 0.5 * k2 * alpha[1])
        db2 = -1j * (beta[1] - g2 * abs(alpha[1]) ** 2) - 0.5 * gam[1] * beta[1]
        dalpha, dbeta = rhs(spec, state)
        assert np.allclose(dalpha, [da1, da2], rtol=1e-14)
        assert np.allclose(dbeta, [db1, db2], rtol=1e-14)

    def test_vacuum_feels_only_the_drive(self):
        spec = scenario("fig2a").spec
        dalpha, dbeta = rhs(spec, MeanFieldState.vacuum(spec))
        assert np.allclose(dalpha, [-1j * W, -1j * W])
        assert np.allclose(dbeta, 0.0)

    def test_matches_three_site_equations(self, rng):
        # odd chain: the shared resonator is pushed by both cavities
        spec = scenario("fig10a").spec
        alpha = rng.normal(size=2) * 1e4 + 1j * rng.normal(size=2) * 1e4
        beta = rng.normal(size=1) * 1e3 + 1j * rng.normal(size=1) * 1e3
        t = 123.0
        state = MeanFieldState(t=t, alpha=alpha, beta=beta)
        g1 = spec.g[0]
        om1 = W * (1 - math.cos(0.006 * t))
        om2 = W * (1 + math.cos(0.006 * t))
        tw = beta[0] + beta[0].conj()
        da1 = -1j * (1.0 - g1 * tw) * alpha[0] - 1j * om1 - 0.05 * alpha[0]
        da2 = -1j * (1.0 + g1 * tw) * alpha[1] - 1j * om2 - 0.05 * alpha[1]
        db1 = -1j * (beta[0] - g1 * abs(alpha[0]) ** 2 + g1 * abs(alpha[1]) ** 2) - 0.5e-5 * beta[0]
        dalpha, dbeta = rhs(spec, state)
        assert np.allclose(dalpha, [da1, da2], rtol=1e-14)
        assert np.allclose(dbeta, [db1], rtol=1e-14)


class TestIntegrate:
    def test_linear_closed_form(self):
        # g -> 0: alpha(t) = alpha_ss (1 - exp(-(i Delta + kappa/2) t))
        spec = linear_spec()
        traj = integrate(spec, MeanFieldState.vacuum(spec), 40.0, dt=0.005, sample_every=400)
        lam = 1j * 1.0 + 0.05
        a_ss = -1j * W / lam
        for i in range(len(traj)):
            t = traj.times[i]
            expect = a_ss * (1 - np.exp(-lam * t))
            if t > 0:
                assert abs(traj.alpha[i, 0] - expect) / abs(expect) <= 1e-6

    def test_last_sample_exactly_at_t_end(self):
        spec = linear_spec()
        traj = integrate(spec, MeanFieldState.vacuum(spec), 7.03, dt=0.005, sample_every=17)
        assert traj.times[-1] == 7.03

    def test_richardson_fourth_order(self):
        # halving dt shrinks the change by ~2^4; accept the spec's 1/15 bound
        spec = scenario("fig2a").spec
        t_end = 20.0
        finals = []
        for dt in (0.04, 0.02, 0.01):
            traj = integrate(spec, MeanFieldState.vacuum(spec), t_end, dt=dt, sample_every=10 ** 9)
            finals.append(np.concatenate([traj.alpha[-1], traj.beta[-1]]))
        change1 = np.max(np.abs(finals[1] - finals[0]))
        change2 = np.max(np.abs(finals[2] - finals[1]))
        assert change2 <= change1 / 15.0

    def test_observed_convergence_order(self):
        # order estimate on the smooth linear problem with a known solution
        spec = linear_spec()
        lam = 1j * 1.0 + 0.05
        t_end = 10.0
        exact = -1j * W / lam * (1 - np.exp(-lam * t_end))
        errs = []
        for dt in (0.2, 0.1, 0.05):
            traj = integrate(spec, MeanFieldState.vacuum(spec), t_end, dt=dt, sample_every=10 ** 9)
            errs.append(abs(traj.alpha[-1, 0] - exact))
        p1 = math.log2(errs[0] / errs[1])
        p2 = math.log2(errs[1] / errs[2])
        assert abs(p1 - 4.0) <= 0.2 and abs(p2 - 4.0) <= 0.2

    def test_divergence_guard(self):
        # undamped resonant cavity grows linearly until the guard trips
        spec = LatticeSpec(topology=CELL_CHAIN, n=1, delta_a=(0.0,), omega_b=(1.0,),
                           g=(1e-30,), kappa=(0.0,), gamma=(0.0,),
                           drive=(DriveProtocol.constant(1e11),))
        with pytest.raises(DivergenceError, match="exceeded"):
            integrate(spec, MeanFieldState.vacuum(spec), 50.0, dt=0.005, sample_every=1000)

    def test_fig2a_first_cavity_stays_below_second(self):
        spec = scenario("fig2a").spec
        traj = integrate(spec, MeanFieldState.vacuum(spec), 500.0, dt=0.005, sample_every=20)
        mask = traj.times >= 150.0
        gap = np.abs(traj.alpha[mask, 1]) - np.abs(traj.alpha[mask, 0])
        assert np.all(gap > 0)

    def test_default_dt_rules(self):
        assert default_dt(scenario("fig2a").spec) == 0.005
        assert default_dt(scenario("fig5").spec) == 0.001
        assert default_dt(scenario("fig8").spec) == 0.001
        assert default_dt(scenario("fig4").spec) == pytest.approx(0.01 / 3.5)


class TestSteadyStateOde:
    def test_linear_closed_form_magnitude(self):
        spec = linear_spec()
        report = find_steady_state_ode(spec, tol=1e-9, max_time=800.0)
        assert abs(report.state.alpha[0]) == pytest.approx(W / math.sqrt(1.0025), rel=1e-9)
        assert abs(report.state.alpha[0]) == pytest.approx(99875.23, abs=0.5)

    def test_fig2a_ordering(self, steady_cache):
        report = find_steady_state_ode(scenario("fig2a").spec, tol=1e-7, max_time=1500.0)
        a = np.abs(report.state.alpha)
        assert a[0] < a[1]
        assert report.method is SteadyStateMethod.ODE_RELAXATION
        assert report.residual < 1e-7

    def test_rejects_cosine_drives(self):
        with pytest.raises(SpecError, match="constant"):
            find_steady_state_ode(scenario("fig10a").spec)

    def test_fig5_has_no_reachable_steady_state(self):
        # the kappa1 = 10 set self-oscillates: relaxation from vacuum must
        # report non-convergence rather than a bogus state
        with pytest.raises(SteadyStateError) as err:
            find_steady_state_ode(scenario("fig5").spec, tol=1e-7, max_time=1200.0)
        assert err.value.residual is not None and err.value.residual > 1e-7


class TestSteadyStateFixedPoint:
    @pytest.mark.parametrize("name", ["fig2a", "fig8", "fig5"])
    def test_frozen_amplitudes(self, name, steady_cache):
        report = steady_cache(name)
        expect_a = FROZEN_FP[name][0]
        assert np.abs(report.state.alpha) == pytest.approx(expect_a, rel=1e-8)
        expect_b = FROZEN_FP[name][1]
        assert np.abs(report.state.beta) == pytest.approx(expect_b, rel=1e-6)

    def test_residual_contract(self, steady_cache):
        for name in ("fig2a", "fig6", "fig7", "fig8"):
            report = steady_cache(name)
            state = report.state
            dalpha, dbeta = rhs(scenario(name).spec, state)
            mx = max(np.abs(np.concatenate([dalpha, dbeta])))
            amp = max(np.abs(np.concatenate([state.alpha, state.beta])))
            assert mx <= 1e-10 * (1.0 + amp)

    def test_linear_case_converges_immediately(self):
        # undamped map: the decoupled problem lands on the closed form at once
        report = find_steady_state_fixed_point(linear_spec(), tol=1e-12, damping=1.0)
        assert report.iterations_or_time <= 3
        assert abs(report.state.alpha[0]) == pytest.approx(W / math.sqrt(1.0025), rel=1e-12)

    def test_agrees_with_ode_on_fig2a(self, steady_cache):
        fp = steady_cache("fig2a")
        ode = find_steady_state_ode(scenario("fig2a").spec, tol=1e-7, max_time=1500.0)
        rel = np.abs(ode.state.alpha - fp.state.alpha) / np.abs(fp.state.alpha)
        assert rel.max() <= 1e-6

    def test_bad_damping_rejected(self):
        with pytest.raises(ValueError, match="damping"):
            find_steady_state_fixed_point(scenario("fig2a").spec, damping=0.0)

    def test_decay_monotonicity(self):
        # raising one cavity's decay strictly lowers its steady amplitude
        base = scenario("fig2a").spec
        mags = []
        for k2 in (0.1, 0.412, 1.0, 5.0):
            spec = set_spec_param(base, "kappa[1]", k2)
            report = find_steady_state_fixed_point(spec, damping=0.2)
            mags.append(abs(report.state.alpha[1]))
        assert all(a > b for a, b in zip(mags, mags[1:]))

    @given(phi=st.floats(min_value=-math.pi, max_value=math.pi))
    @settings(max_examples=12, deadline=None)
    def test_drive_phase_gauge(self, phi):
        # a common laser phase rotates alpha rigidly and leaves |G| unchanged
        base = scenario("fig2a").spec
        spec = set_spec_param(set_spec_param(base, "drive[0].phase", phi), "drive[1].phase", phi)
        ref = find_steady_state_fixed_point(base).state
        rot = find_steady_state_fixed_point(spec).state
        expect = ref.alpha * np.exp(1j * phi)
        assert np.max(np.abs(rot.alpha - expect) / np.abs(expect)) <= 1e-9
        ch_ref = np.abs(effective_chain(base, ref).couplings)
        ch_rot = np.abs(effective_chain(spec, rot).couplings)
        assert np.allclose(ch_ref, ch_rot, rtol=1e-9)


class TestCalibrateG:
    def test_fig2_base_reproduces_caption_value(self):
        spec = calibrate_g(scenario("fig2a").spec, 0, CouplingEquality(0, 2), tol=1e-6)
        assert spec.g[0] == pytest.approx(1.02325932e-6, rel=1e-4)   # frozen solver root
        assert spec.g[0] == pytest.approx(1.023e-6, rel=5e-3)        # caption, a few permille
        report = find_steady_state_fixed_point(spec)
        mags = np.abs(effective_chain(spec, report.state).couplings)
        assert abs(mags[0] - mags[2]) <= 1e-5 * mags[2]
        assert mags[0] < mags[1]

    def test_already_calibrated_returns_input(self):
        spec = set_spec_param(scenario("fig7").spec, "g[1]", 1.0002344191e-6)
        out = calibrate_g(spec, 1, CouplingEquality(0, 2), tol=1e-4, damping=0.2)
        assert out.g[1] == spec.g[1]

    def test_kappa1_3p5_root_differs_from_caption(self):
        # the printed caption coupling (2.015e-6) balances |G1| = |G3| only
        # without the resonator feedback; the self-consistent root is higher
        spec = set_spec_param(set_spec_param(scenario("fig2a").spec, "kappa[0]", 3.5),
                              "g[0]", 2.015e-6)
        cal = calibrate_g(spec, 0, CouplingEquality(0, 2), tol=1e-6, damping=0.1)
        assert cal.g[0] == pytest.approx(5.23181212e-6, rel=1e-4)

    def test_out_of_range_bond(self):
        from omtopo.meanfield import CalibrationError
        with pytest.raises(CalibrationError, match="bond"):
            calibrate_g(scenario("fig2a").spec, 0, CouplingEquality(0, 5))

    def test_odd_chain_rejected(self):
        with pytest.raises(SpecError, match="cell"):
            calibrate_g(scenario("fig10a").spec, 0, CouplingEquality(0, 1))


class TestTrajectoryCsv:
    def test_header_and_roundtrip(self, tmp_path):
        spec = scenario("fig2a").spec
        traj = integrate(spec, MeanFieldState.vacuum(spec), 1.0, dt=0.01, sample_every=20)
        path = tmp_path / "traj.csv"
        trajectory_to_csv(traj, path)
        lines = path.read_text().splitlines()
        assert lines[0] == ("t,re_alpha_1,im_alpha_1,re_alpha_2,im_alpha_2,"
                            "re_beta_1,im_beta_1,re_beta_2,im_beta_2,"
                            "abs_alpha_1,abs_alpha_2,abs_beta_1,abs_beta_2")
        last = [float(x) for x in lines[-1].split(",")]
        assert last[0] == 1.0
        assert last[1] == traj.alpha[-1, 0].real  # 17 digits round-trip exactly
