import math

import numpy as np
import pytest

from ulcov.errors import ConfigurationError, DomainError
from ulcov.pathloss import (
    LinkType,
    LosProfile,
    PathLossModel,
    PathLossSegment,
    PowerControl,
    cross_boundary,
    los_probability,
    path_loss,
    three_gpp_path_loss,
    tx_power,
)


class TestLosProfile:
    def test_linear_endpoints(self):
        prof = LosProfile.linear(0.3)
        assert los_probability(prof, 1e-12) == pytest.approx(1.0, abs=1e-9)
        assert los_probability(prof, 0.15) == pytest.approx(0.5)
        assert los_probability(prof, 0.4) == 0.0
        assert los_probability(prof, 0.3) == pytest.approx(0.0, abs=1e-12)

    def test_exponential_branch_value_at_cutoff(self):
        # Lower branch at d1 = R1/ln(10): 1 - 5 exp(-ln 10) = 0.5
        prof = LosProfile.exponential(R1=0.156, R2=0.03)
        assert prof.d1 == pytest.approx(0.156 / math.log(10.0))
        assert los_probability(prof, prof.d1) == pytest.approx(1.0 - 5.0 / 10.0)
        # The printed model jumps at the cutoff; the upper branch starts
        # at 5 exp(-d1/R2).
        above = los_probability(prof, prof.d1 * (1 + 1e-12))
        assert above == pytest.approx(5.0 * math.exp(-prof.d1 / 0.03), rel=1e-9)

    def test_single_slope_is_zero(self):
        prof = LosProfile.single_slope()
        assert los_probability(prof, 0.01) == 0.0
        assert np.all(los_probability(prof, np.array([0.1, 1.0, 10.0])) == 0.0)

    @pytest.mark.parametrize("kind", ["linear", "exponential", "single_slope"])
    def test_range_invariant(self, kind):
        prof = {
            "linear": LosProfile.linear(0.3),
            "exponential": LosProfile.exponential(),
            "single_slope": LosProfile.single_slope(),
        }[kind]
        r = np.exp(np.random.default_rng(3).uniform(math.log(1e-4), math.log(50.0), 500))
        vals = np.asarray(los_probability(prof, r))
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)

    def test_linear_monotone_continuous(self):
        prof = LosProfile.linear(0.3)
        r = np.linspace(1e-6, 1.0, 4001)
        vals = np.asarray(los_probability(prof, r))
        assert np.all(np.diff(vals) <= 1e-12)
        assert np.max(np.abs(np.diff(vals))) < 1e-2  # no jumps on a fine grid

    def test_domain_errors(self):
        prof = LosProfile.linear(0.3)
        with pytest.raises(DomainError):
            los_probability(prof, 0.0)
        with pytest.raises(DomainError):
            los_probability(prof, -1.0)

    def test_bad_construction(self):
        with pytest.raises(ConfigurationError):
            LosProfile(kind="nope")
        with pytest.raises(ConfigurationError):
            LosProfile.linear(0.0)
        with pytest.raises(ConfigurationError):
            LosProfile.exponential(R1=-1.0)


class TestPathLoss:
    def test_reference_distance(self, model):
        assert path_loss(model, 1.0, LinkType.LOS) == pytest.approx(10**10.38)
        assert path_loss(model, 1.0, LinkType.NLOS) == pytest.approx(10**14.54)

    def test_nlos_at_100m(self, model):
        # 145.4 + 37.5 log10(0.1) = 107.9 dB
        assert path_loss(model, 0.1, LinkType.NLOS) == pytest.approx(10**10.79, rel=1e-12)

    def test_monotone_in_distance(self, model):
        rng = np.random.default_rng(5)
        r = np.sort(rng.uniform(1e-4, 5.0, 200))
        for link in LinkType:
            vals = np.asarray(path_loss(model, r, link))
            assert np.all(np.diff(vals) > 0.0)

    def test_domain_error(self, model):
        with pytest.raises(DomainError):
            path_loss(model, 0.0, LinkType.LOS)

    def test_multi_segment_lookup(self):
        seg1 = PathLossSegment(0.0, 0.1, 1e10, 2.0, 1e14, 3.5)
        seg2 = PathLossSegment(0.1, math.inf, 2e10, 2.2, 3e14, 3.8)
        m = PathLossModel(segments=(seg1, seg2))
        # boundary distance belongs to the lower segment
        assert path_loss(m, 0.1, LinkType.LOS) == pytest.approx(1e10 * 0.1**2.0)
        assert path_loss(m, 0.1000001, LinkType.LOS) == pytest.approx(2e10 * 0.1000001**2.2)

    def test_invalid_models(self):
        with pytest.raises(ConfigurationError):
            PathLossModel(segments=())
        with pytest.raises(ConfigurationError):
            # NLoS exponent must exceed the LoS exponent
            PathLossSegment(0.0, math.inf, 1e10, 3.0, 1e14, 2.0)
        with pytest.raises(ConfigurationError):
            # must start at zero
            PathLossModel(segments=(PathLossSegment(0.1, math.inf, 1e10, 2.0, 1e14, 3.0),))
        with pytest.raises(ConfigurationError):
            # must reach infinity
            PathLossModel(segments=(PathLossSegment(0.0, 1.0, 1e10, 2.0, 1e14, 3.0),))


class TestTxPower:
    def test_full_compensation_inverts_loss(self, model):
        pc = PowerControl(p0_mw=10**-7.6, epsilon=1.0)
        zeta = path_loss(model, 0.2, LinkType.NLOS)
        assert tx_power(pc, zeta) / zeta == pytest.approx(pc.p0_mw, rel=1e-14)

    def test_unit_attenuation(self):
        pc = PowerControl(p0_mw=0.025, epsilon=0.7)
        assert tx_power(pc, 1.0) == pytest.approx(0.025)

    def test_exponent_arithmetic(self):
        pc = PowerControl(p0_mw=10**-7.6, epsilon=0.7)
        assert tx_power(pc, 1e10) == pytest.approx(10**-0.6, rel=1e-12)

    def test_domain_error(self):
        pc = PowerControl(p0_mw=1.0, epsilon=0.5)
        with pytest.raises(DomainError):
            tx_power(pc, 0.0)

    def test_invalid_power_control(self):
        with pytest.raises(ConfigurationError):
            PowerControl(p0_mw=0.0, epsilon=0.5)
        with pytest.raises(ConfigurationError):
            PowerControl(p0_mw=1.0, epsilon=0.0)
        with pytest.raises(ConfigurationError):
            PowerControl(p0_mw=1.0, epsilon=1.2)


class TestCrossBoundary:
    def test_known_value(self, model):
        # equal loss: 103.8 + 20.9 log10(0.3) = 145.4 + 37.5 log10(r1)
        expected = 10 ** ((103.8 + 20.9 * math.log10(0.3) - 145.4) / 37.5)
        assert cross_boundary(model, 0.3, LinkType.LOS) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.0397, abs=2e-4)

    def test_inverse_composition(self, model):
        rng = np.random.default_rng(11)
        for r in rng.uniform(0.01, 3.0, 50):
            r1 = cross_boundary(model, r, LinkType.LOS)
            assert cross_boundary(model, r1, LinkType.NLOS) == pytest.approx(r, rel=1e-12)

    def test_equal_intercepts_fixed_point(self):
        m = PathLossModel(
            segments=(PathLossSegment(0.0, math.inf, 1e12, 2.09, 1e12, 3.75),)
        )
        assert cross_boundary(m, 1.0, LinkType.LOS) == pytest.approx(1.0, rel=1e-14)
        assert cross_boundary(m, 1.0, LinkType.NLOS) == pytest.approx(1.0, rel=1e-14)

    def test_equal_loss_identity(self, model):
        rng = np.random.default_rng(13)
        r = rng.uniform(1e-3, 5.0, 100)
        r1 = np.asarray(cross_boundary(model, r, LinkType.LOS))
        lhs = np.asarray(path_loss(model, r, LinkType.LOS))
        rhs = np.asarray(path_loss(model, r1, LinkType.NLOS))
        assert np.allclose(lhs, rhs, rtol=1e-12)

    def test_domain_error(self, model):
        with pytest.raises(DomainError):
            cross_boundary(model, -0.5, LinkType.LOS)


def test_three_gpp_factory_defaults():
    m = three_gpp_path_loss()
    assert m.n_segments == 1
    seg = m.segments[0]
    assert seg.alpha_los == 2.09 and seg.alpha_nlos == 3.75
    assert seg.a_los == pytest.approx(10**10.38)
    assert seg.a_nlos == pytest.approx(10**14.54)
