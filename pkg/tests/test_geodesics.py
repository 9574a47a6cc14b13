"""Chain curves, the almost-geodesic checker, and visibility sampling."""

import math

import numpy as np
import pytest

from koblab.curves import SampledCurve
from koblab.domains import unit_ball, unit_bidisc
from koblab.geodesics import (
    build_chain_curve,
    check_almost_geodesic,
    sample_cap_points,
    visibility_experiment,
)
from koblab.kobayashi import (
    AnalyticDisc,
    ChainLink,
    DiscChain,
    UncertifiedDiscError,
    chain_upper_bound,
)
from koblab.ladder import DyadicLadder
from koblab.poincare import poincare_distance


def coordinate_disc_chain(zeta_in=0.0, zeta_out=0.5):
    disc = AnalyticDisc([0.0, 0.0], [1.0 - 1e-9, 0.0])
    return DiscChain(links=(ChainLink(disc, zeta_in, zeta_out),))


def _unit_phase(rng):
    theta = rng.uniform(0, 2 * math.pi)
    return complex(math.cos(theta), math.sin(theta))


def random_geodesic_chain(rng):
    """Certified single-disc chain that is genuinely geodesic in the bidisc.

    The first coordinate sweeps (almost) the full disc while the second stays
    a strict contraction of it, so the parameter distance is realized by the
    first-coordinate projection.
    """
    rho = 1.0 - 1e-9
    phase = _unit_phase(rng)
    z2c = 0.55 * math.sqrt(rng.uniform()) * _unit_phase(rng)
    gamma_cap = min(0.3, (1.0 - abs(z2c)) * 0.8)
    gamma = rng.uniform(0.05, gamma_cap) * _unit_phase(rng)
    disc = AnalyticDisc([0.0, z2c], rho * phase * np.array([1.0, gamma]))
    while True:
        zin = 0.75 * math.sqrt(rng.uniform()) * _unit_phase(rng)
        zout = 0.75 * math.sqrt(rng.uniform()) * _unit_phase(rng)
        if 0.3 <= poincare_distance(zin, zout) <= 2.0:
            return DiscChain(links=(ChainLink(disc, zin, zout),))


class TestBuildChainCurve:
    def test_embedded_disc_geodesic(self):
        chain = coordinate_disc_chain()
        curve = build_chain_curve(unit_bidisc(), chain, 200)
        assert curve.param_length == pytest.approx(0.5493061443340549, abs=1e-8)
        assert np.all(curve.points[:, 1] == 0)

    def test_ladder_chain_inside_segments(self):
        ladder = DyadicLadder(3)
        a0, a1, b0 = float(ladder.a(1)), float(ladder.a(2)), float(ladder.b(1))
        disc = AnalyticDisc([0.0, -a0 * a1], [b0, b0 * (a1 + a0)])
        chain = DiscChain(links=(ChainLink(disc, 0.25, 0.0625),))
        curve = build_chain_curve(unit_bidisc(), chain, 300)
        assert curve.param_length == pytest.approx(0.19283124040599234, abs=1e-9)
        seg = ladder.segment(1)
        slope, intercept = float(seg.slope), float(seg.intercept)
        for z1, z2 in curve.points:
            assert abs(z2 - (slope * z1 + intercept)) < 1e-15
            assert abs(z1) < float(seg.radius)

    def test_degenerate_link_is_constant(self):
        chain = coordinate_disc_chain(0.3, 0.3)
        curve = build_chain_curve(unit_bidisc(), chain, 50)
        assert curve.size == 1 and curve.param_length == 0.0

    def test_length_matches_chain_cost(self):
        rng = np.random.Generator(np.random.Philox(key=23))
        for _ in range(5):
            chain = random_geodesic_chain(rng)
            curve = build_chain_curve(unit_bidisc(), chain, 1000)
            cost = chain_upper_bound(unit_bidisc(), chain, margin=0.0)
            assert abs(curve.param_length - cost) <= 1e-9

    def test_uncertified_chain_rejected(self):
        disc = AnalyticDisc([0.0, 0.0], [2.0, 0.0])
        chain = DiscChain(links=(ChainLink(disc, 0.0, 0.4),))
        with pytest.raises(UncertifiedDiscError):
            build_chain_curve(unit_bidisc(), chain, 50)


class TestChecker:
    def test_embedded_geodesic_passes_small_kappa(self):
        curve = build_chain_curve(unit_bidisc(), coordinate_disc_chain(), 200)
        verdict = check_almost_geodesic(unit_bidisc(), curve, lam=1.0, kappa=0.01, seed=1)
        assert verdict.overall == "pass"

    def test_zero_kappa_is_indeterminate_not_fail(self):
        curve = build_chain_curve(unit_bidisc(), coordinate_disc_chain(), 200)
        verdict = check_almost_geodesic(unit_bidisc(), curve, lam=1.0, kappa=0.0, seed=1)
        assert verdict.overall == "indeterminate"
        statuses = {c.status for c in verdict.condition_a}
        assert "fail" not in statuses
        assert "indeterminate" in statuses

    def test_euclidean_segment_certified_fail(self):
        ts = np.linspace(0.0, 1.8, 40)
        pts = np.stack([(-0.9 + ts).astype(complex), np.zeros(40, complex)], axis=1)
        curve = SampledCurve(ts, pts)
        verdict = check_almost_geodesic(unit_ball(2), curve, lam=1.0, kappa=0.1, seed=2)
        assert verdict.overall == "fail"
        certified = [c for c in verdict.condition_a if c.status == "fail"]
        assert certified  # the whole bracket exits the band somewhere

    def test_parameter_shift_invariance(self):
        curve = build_chain_curve(unit_bidisc(), coordinate_disc_chain(), 150)
        shifted = curve.shifted(5.0)
        v1 = check_almost_geodesic(unit_bidisc(), curve, 1.0, 0.05, seed=3)
        v2 = check_almost_geodesic(unit_bidisc(), shifted, 1.0, 0.05, seed=3)
        assert [c.status for c in v1.condition_a] == [c.status for c in v2.condition_a]
        assert [c.status for c in v1.condition_b] == [c.status for c in v2.condition_b]
        assert v1.overall == v2.overall

    def test_pipeline_soundness_no_false_fails(self):
        # curves built from certified geodesic chains at kappa comfortably
        # above bracket width plus stitching slack must never fail
        rng = np.random.Generator(np.random.Philox(key=29))
        for trial in range(20):
            chain = random_geodesic_chain(rng)
            curve = build_chain_curve(unit_bidisc(), chain, 120)
            verdict = check_almost_geodesic(
                unit_bidisc(), curve, lam=1.0, kappa=0.05, seed=trial, pair_samples=12
            )
            assert verdict.overall == "pass"

    def test_curve_outside_domain_rejected(self):
        ts = np.array([0.0, 1.0])
        pts = np.array([[0.0 + 0j, 0.0], [1.5 + 0j, 0.0]])
        with pytest.raises(Exception):
            check_almost_geodesic(unit_bidisc(), SampledCurve(ts, pts), 1.0, 0.1)


class TestVisibility:
    def test_diameter_curve_reaches_center(self):
        # the geodesic through antipodal-ish points passes through the middle
        chain_est_points = ([-0.9, 0.0], [0.9, 0.0])
        from koblab.kobayashi import estimate_distance

        est = estimate_distance(unit_ball(2), *chain_est_points)
        curve = build_chain_curve(unit_ball(2), est.chain, 201)
        deltas = [unit_ball(2).boundary_distance(p) for p in curve.points]
        assert max(deltas) >= 0.999

    def test_experiment_on_ball(self):
        report = visibility_experiment(
            unit_ball(2), [1.0, 0.0], [-1.0, 0.0], r_nbhd=0.05,
            n_curves=12, seed=0, kappa=0.2,
        )
        assert report.passing >= 10
        assert report.epsilon_star is not None and report.epsilon_star >= 0.3
        doc = report.to_json_dict()
        assert doc["passing"] == report.passing
        assert len(doc["curves"]) == 12

    def test_rejects_overlapping_caps(self):
        with pytest.raises(ValueError):
            visibility_experiment(unit_ball(2), [1.0, 0.0], [1.0, 0.0], r_nbhd=0.05)
        with pytest.raises(ValueError):
            visibility_experiment(unit_ball(2), [1.0, 0.0], [0.95, 0.0], r_nbhd=0.05)

    def test_epsilon_star_antitone_in_radius(self):
        # shared stream scale makes the smaller-radius family a subfamily
        domain = unit_ball(2)
        reports = {}
        for r in (0.03, 0.08):
            reports[r] = visibility_experiment(
                domain, [1.0, 0.0], [-1.0, 0.0], r_nbhd=r, r_cap=0.08,
                n_curves=6, seed=5, kappa=0.2,
            )
        small, large = reports[0.03], reports[0.08]
        assert small.epsilon_star is not None and large.epsilon_star is not None
        assert small.epsilon_star >= large.epsilon_star - 1e-12

    def test_cap_sampling_nested(self):
        # identical streams: the small-radius accepts are a subset of the
        # large-radius accepts, provided the large run reads at least as far
        domain = unit_ball(2)
        rng1 = np.random.Generator(np.random.Philox(key=9))
        rng2 = np.random.Generator(np.random.Philox(key=9))
        big = sample_cap_points(domain, [1.0, 0.0], 0.08, 400, rng1, r_cap=0.08)
        small = sample_cap_points(domain, [1.0, 0.0], 0.05, 5, rng2, r_cap=0.08)
        big_set = {tuple(np.round(p, 12)) for p in big}
        assert all(tuple(np.round(p, 12)) in big_set for p in small)
