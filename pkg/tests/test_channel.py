import numpy as np
import pytest
from pydantic import ValidationError

from src.channel import (
    ORIGIN_CODES,
    ClickOrigin,
    ClickOutcome,
    DetectorModel,
    FiberSpec,
    LinkParams,
    SourceModel,
    coded_click_probabilities,
    expected_qber,
    gate_click_probability,
    matched_click_probabilities,
    sample_click,
    sample_clicks,
    secure_distance,
    signal_click_probability,
    transmittance,
)
from src.utils import ParameterError


def _binomial_sigma(p: float, n: int) -> float:
    return float(np.sqrt(p * (1 - p) / n))


class TestTransmittance:
    def test_twenty_six_db(self):
        assert transmittance(125, 0.208) == pytest.approx(10**-2.6, rel=1e-12)
        assert transmittance(125, 0.208) == pytest.approx(2.512e-3, rel=1e-3)

    def test_zero_length(self):
        assert transmittance(0, 0.3) == 1.0

    def test_ten_db(self):
        assert transmittance(50, 0.2) == pytest.approx(0.1, rel=1e-12)

    def test_multiplicative(self):
        assert transmittance(70, 0.208) == pytest.approx(
            transmittance(30, 0.208) * transmittance(40, 0.208), abs=1e-12
        )

    def test_negative_length_rejected(self):
        with pytest.raises(ParameterError):
            transmittance(-1, 0.2)


class TestLinkParams:
    def test_defaults(self, link):
        assert link.fiber.length == 125.0
        assert link.source.mu_signal == 0.1
        assert link.detector.dark_prob == 8e-7
        assert link.total_loss_db == pytest.approx(29.0)

    def test_field_adds_one_percent(self, link):
        assert link.for_field().e_opt == pytest.approx(link.e_opt + 0.01)

    def test_unmodulated_below_signal_rejected(self):
        with pytest.raises(ValidationError):
            SourceModel(mu_signal=0.5, mu_unmodulated=0.4)

    def test_negative_length_rejected(self):
        with pytest.raises(ValidationError):
            FiberSpec(length=-5)

    def test_pulse_must_fit_in_bin(self):
        with pytest.raises(ValidationError):
            LinkParams(source=SourceModel(pulse_width=8.0))

    @pytest.mark.parametrize("gate_width", [0.5, 7.5, 10.0])
    def test_gate_must_hold_pulse_inside_one_bin(self, gate_width):
        with pytest.raises(ValidationError, match="gate_width"):
            LinkParams(detector=DetectorModel(gate_width=gate_width))

    def test_gate_equal_to_pulse_accepted(self):
        link = LinkParams(detector=DetectorModel(gate_width=1.0))
        assert link.detector.gate_width == link.source.pulse_width

    @pytest.mark.parametrize("efficiency", [0.0, 1.5])
    def test_efficiency_range(self, efficiency):
        with pytest.raises(ValidationError):
            DetectorModel(efficiency=efficiency)


class TestSignalClickProbability:
    def test_no_interference_no_click(self, link):
        assert signal_click_probability(link, 0.0) == 0.0

    def test_small_mu_is_linear(self):
        link = LinkParams(source=SourceModel(mu_signal=1e-4, mu_unmodulated=1e-4))
        expected = 1e-4 * link.fiber_transmittance * link.bob_transmittance * 0.25 * 0.6
        assert signal_click_probability(link, 0.6 * 0.25) == pytest.approx(expected, rel=0.01)

    def test_out_of_range_rejected(self, link):
        with pytest.raises(ParameterError):
            signal_click_probability(link, 1.2)

    def test_matches_monte_carlo(self, link, rng):
        p = signal_click_probability(link, 0.25)
        n_chunks, chunk = 10, 1_000_000
        clicks = sum(
            int(np.count_nonzero(sample_clicks(rng, np.full(chunk, p), 0.0)))
            for _ in range(n_chunks)
        )
        n = n_chunks * chunk
        assert abs(clicks / n - p) < 3 * _binomial_sigma(p, n)


class TestSampleClick:
    def test_certain_signal(self, rng):
        assert sample_click(rng, 1.0, 0.0) == ClickOutcome(True, ClickOrigin.SIGNAL)

    def test_never(self, rng):
        assert sample_click(rng, 0.0, 0.0) == ClickOutcome(False, ClickOrigin.NONE)

    def test_total_click_rate(self, rng):
        n = 1_000_000
        codes = sample_clicks(rng, np.full(n, 0.3), 0.1)
        rate = np.count_nonzero(codes) / n
        assert abs(rate - 0.37) < 3 * _binomial_sigma(0.37, n)
        dark_share = np.count_nonzero(codes == ORIGIN_CODES[ClickOrigin.DARK]) / n
        assert abs(dark_share - 0.07) < 3 * _binomial_sigma(0.07, n)

    def test_scalar_sampler_agrees(self, rng):
        n = 20_000
        clicks = sum(sample_click(rng, 0.3, 0.1).clicked for _ in range(n))
        assert abs(clicks / n - 0.37) < 3 * _binomial_sigma(0.37, n)

    def test_origin_must_match_click(self):
        with pytest.raises(ParameterError):
            ClickOutcome(False, ClickOrigin.DARK)


class TestExpectedQber:
    def test_perfect_link(self):
        link = LinkParams(e_opt=0.0, detector=DetectorModel(dark_prob=0.0))
        assert expected_qber(link) == 0.0

    def test_infinite_fiber_is_random(self, link):
        assert expected_qber(link.with_length(3000)) == pytest.approx(0.5, abs=1e-6)

    def test_default_operating_point(self, link):
        assert 0.04 <= expected_qber(link) <= 0.06

    def test_field_stays_below_six_percent(self, link):
        assert expected_qber(link.for_field()) < 0.06

    def test_non_decreasing_in_length(self, link):
        values = [expected_qber(link.with_length(km)) for km in range(0, 301, 10)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_increasing_in_dark_prob(self, link):
        values = [
            expected_qber(link.model_copy(update={"detector": DetectorModel(dark_prob=d)}))
            for d in (0.0, 1e-7, 1e-6, 1e-5)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_tends_to_e_opt_without_dark_counts(self):
        link = LinkParams(detector=DetectorModel(dark_prob=0.0))
        assert expected_qber(link) == pytest.approx(link.e_opt, abs=1e-12)

    def test_phase_error_adds_sin_squared(self, quiet_link):
        assert expected_qber(quiet_link, phase_error=0.64) > expected_qber(quiet_link) + 0.08

    def test_matches_dark_count_formula(self, link):
        right, wrong = matched_click_probabilities(link)
        d = link.detector.dark_prob
        p_sig = signal_click_probability(link, 0.25) / 2
        p_dark = d * (1 - p_sig)
        formula = (link.e_opt * p_sig + p_dark / 2) / (p_sig + p_dark)
        assert wrong / (right + wrong) == pytest.approx(formula, rel=1e-4)

    @pytest.mark.parametrize("mu", [0.1, 1.0, 10.0, 100.0])
    def test_equals_e_opt_at_any_brightness_without_dark_counts(self, mu):
        link = LinkParams(
            source=SourceModel(mu_signal=mu, mu_unmodulated=mu),
            fiber=FiberSpec(length=0.0),
            detector=DetectorModel(dark_prob=0.0),
            e_opt=0.04,
        )
        assert expected_qber(link) == pytest.approx(0.04, abs=1e-12)

    def test_coding_error_is_a_fraction_of_signal_clicks(self):
        link = LinkParams(source=SourceModel(mu_signal=100.0, mu_unmodulated=100.0),
                          fiber=FiberSpec(length=0.0), e_opt=0.04)
        right, wrong = coded_click_probabilities(link, [0.25, 0.0], [0.0, 0.25])
        assert right == pytest.approx(0.96, abs=1e-4)
        assert wrong == pytest.approx(0.04, abs=1e-4)


@pytest.mark.parametrize(
    "link",
    [
        LinkParams(
            fiber=FiberSpec(length=0.0),
            source=SourceModel(mu_signal=0.4, mu_unmodulated=0.4),
        ),
        LinkParams(
            fiber=FiberSpec(length=0.0),
            source=SourceModel(mu_signal=0.4, mu_unmodulated=0.4),
            detector=DetectorModel(dark_prob=5e-3),
        ),
    ],
    ids=["bright", "noisy"],
)
def test_monte_carlo_qber_agrees_with_analytic(link, rng):
    d = link.detector.dark_prob
    p_right, p_wrong = coded_click_probabilities(link, [0.25, 0.0], [0.0, 0.25])
    n = 3_000_000
    right = np.count_nonzero(sample_clicks(rng, np.full(n, p_right), d))
    wrong = np.count_nonzero(sample_clicks(rng, np.full(n, p_wrong), d))
    assert right + wrong >= 100_000
    q = expected_qber(link)
    assert abs(wrong / (right + wrong) - q) < 3 * _binomial_sigma(q, right + wrong)


def test_gate_probability_combines_signal_and_dark():
    np.testing.assert_allclose(gate_click_probability([0.0, 0.3, 1.0], 0.1), [0.1, 0.37, 1.0])


def test_secure_distance_beyond_150_km(link):
    distance = secure_distance(link)
    assert 150.0 < distance <= 200.0
    assert expected_qber(link.with_length(distance)) == pytest.approx(0.10, abs=1e-6)
