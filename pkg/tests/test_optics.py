import numpy as np
import pytest
from scipy import stats

from src.channel import FiberSpec, LinkParams
from src.optics import (
    InterferometerSpec,
    JonesMatrix,
    JonesVector,
    MirrorKind,
    Port,
    arm_round_trip,
    central_bin_probability,
    end_to_end_field,
    faraday_mirror,
    fringe_model,
    fringe_origin,
    interferometer_transfer,
    link_fringe,
    phase_scan,
    random_birefringence,
    scan_phases,
    visibility,
    wrap_phase,
)
from src.utils import ParameterError, UndefinedVisibilityError

F = np.array([[0, 1], [-1, 0]], dtype=complex)


def _random_complex(rng: np.random.Generator) -> JonesMatrix:
    return JonesMatrix(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))


class TestFaradayMirror:
    def test_matrix(self):
        np.testing.assert_array_equal(faraday_mirror().m, F)

    def test_double_reflection_is_minus_identity(self):
        ff = faraday_mirror() @ faraday_mirror()
        assert ff.distance(JonesMatrix.identity().scaled(-1)) < 1e-15

    def test_unitary(self):
        assert faraday_mirror().is_unitary()


class TestRandomBirefringence:
    def test_lossless_is_unitary(self, rng):
        assert random_birefringence(rng, 0.0).is_unitary()

    def test_loss_scales_singular_values(self, rng):
        singular = random_birefringence(rng, 20.0).singular_values()
        np.testing.assert_allclose(singular, 0.1, atol=1e-12)

    def test_negative_loss_rejected(self, rng):
        with pytest.raises(ParameterError):
            random_birefringence(rng, -1.0)

    def test_deterministic_given_seed(self):
        a = random_birefringence(np.random.default_rng(3))
        b = random_birefringence(np.random.default_rng(3))
        assert a.distance(b) == 0.0

    @pytest.mark.slow
    def test_haar_marginal_is_uniform(self, rng):
        samples = [abs(random_birefringence(rng).m[0, 0]) ** 2 for _ in range(100_000)]
        assert stats.kstest(samples, "uniform").pvalue > 0.01


class TestArmRoundTrip:
    def test_identity_arm_gives_faraday_matrix(self):
        trip = arm_round_trip(JonesMatrix.identity(), MirrorKind.FARADAY90)
        assert trip.distance(faraday_mirror()) < 1e-15

    def test_faraday_identity_holds_for_any_transfer(self, rng):
        for _ in range(1000):
            t = _random_complex(rng)
            trip = arm_round_trip(t, MirrorKind.FARADAY90)
            assert trip.distance(faraday_mirror().scaled(t.det())) < 1e-12

    def test_plain_mirror_doubles_retardance(self):
        beta = 0.37
        t = JonesMatrix.diagonal(1, np.exp(1j * beta))
        trip = arm_round_trip(t, MirrorKind.PLAIN)
        assert trip.distance(JonesMatrix.diagonal(1, np.exp(2j * beta))) < 1e-15

    def test_extra_phase_is_global(self):
        trip = arm_round_trip(JonesMatrix.identity(), MirrorKind.FARADAY90, np.pi)
        assert trip.distance(faraday_mirror().scaled(-1)) < 1e-15


class TestInterferometerTransfer:
    def test_lossless_conserves_power(self):
        field = interferometer_transfer(InterferometerSpec.ideal(0.8), JonesVector.linear(0.3))
        assert field.total_power() == pytest.approx(1.0, abs=1e-12)

    def test_forward_port_gets_a_quarter_per_bin(self):
        field = interferometer_transfer(InterferometerSpec.ideal(), JonesVector.horizontal())
        assert field.power(0, Port.FORWARD) == pytest.approx(0.25, abs=1e-12)
        assert field.power(1, Port.FORWARD) == pytest.approx(0.25, abs=1e-12)

    def test_modulator_double_pass_loss(self):
        spec = InterferometerSpec(modulator_loss_db=3.0)
        field = interferometer_transfer(spec, JonesVector.horizontal())
        assert field.power(1, Port.FORWARD) == pytest.approx(0.25 * 10**-0.6, rel=1e-12)
        assert field.power(0, Port.FORWARD) == pytest.approx(0.25, abs=1e-12)

    def test_overpowered_input_rejected(self):
        with pytest.raises(ParameterError):
            interferometer_transfer(InterferometerSpec.ideal(), JonesVector(np.array([1.0, 1.0])))

    @pytest.mark.parametrize("ratio", [0.0, 1.0, 1.5])
    def test_coupler_ratio_must_be_open_interval(self, ratio):
        with pytest.raises(ParameterError):
            InterferometerSpec(coupler_ratio=ratio)

    def test_bins_must_be_separable(self):
        spec = InterferometerSpec()
        spec.check_bins_separable(1.0)
        with pytest.raises(ParameterError):
            spec.check_bins_separable(7.5)


class TestEndToEnd:
    def test_constructive_point(self):
        origin = fringe_origin()
        field = end_to_end_field(
            InterferometerSpec.ideal(origin), JonesMatrix.identity(), InterferometerSpec.ideal(0.0)
        )
        assert field.detector_power(1) == pytest.approx(0.25, abs=1e-12)

    def test_destructive_point(self):
        origin = fringe_origin()
        field = end_to_end_field(
            InterferometerSpec.ideal(origin + np.pi),
            JonesMatrix.identity(),
            InterferometerSpec.ideal(0.0),
        )
        assert field.detector_power(1) == pytest.approx(0.0, abs=1e-12)

    def test_lossless_link_conserves_probability(self, rng):
        for _ in range(100):
            alice, bob = (
                InterferometerSpec(
                    short_arm=random_birefringence(rng),
                    long_arm=random_birefringence(rng),
                    modulator_loss_db=0.0,
                    phase=float(rng.uniform(-np.pi, np.pi)),
                )
                for _ in range(2)
            )
            field = end_to_end_field(alice, random_birefringence(rng), bob)
            assert field.total_power() == pytest.approx(1.0, abs=1e-12)
            assert field.bob.bins(Port.MONITOR) == [0, 1, 2]

    def test_lossy_link_loses_probability(self, rng):
        field = end_to_end_field(
            InterferometerSpec(), random_birefringence(rng, 3.0), InterferometerSpec()
        )
        assert field.total_power() < 1.0


class TestCentralBinProbability:
    def test_lossless_constructive(self, lossless_link):
        assert central_bin_probability(fringe_origin(), 0.0, lossless_link) == pytest.approx(
            0.25, abs=1e-12
        )

    def test_twenty_six_db_channel(self, link):
        expected = 0.25 * 10**-2.6
        assert central_bin_probability(fringe_origin(), 0.0, link) == pytest.approx(
            expected, rel=1e-9
        )

    def test_independent_of_channel_polarization(self, rng, lossless_link):
        reference = central_bin_probability(0.9, 0.2, lossless_link)
        for _ in range(100):
            value = central_bin_probability(0.9, 0.2, lossless_link, random_birefringence(rng))
            assert value == pytest.approx(reference, abs=1e-12)

    def test_rejects_non_finite_phase(self, link):
        with pytest.raises(ParameterError):
            central_bin_probability(np.nan, 0.0, link)


class TestVisibility:
    phases = scan_phases(16)

    def test_full_fringe(self):
        assert visibility((1 + np.cos(self.phases)) / 2) == pytest.approx(1.0)

    def test_constant(self):
        assert visibility(np.full(16, 0.3)) == 0.0

    def test_partial_fringe(self):
        assert visibility((1 + 0.9 * np.cos(self.phases)) / 2) == pytest.approx(0.9, abs=1e-9)

    def test_all_zero_undefined(self):
        with pytest.raises(UndefinedVisibilityError):
            visibility(np.zeros(16))

    def test_too_few_samples(self):
        with pytest.raises(ParameterError):
            visibility(np.ones(7))


class TestPolarizationIndependence:
    def test_random_arms_and_channel_leave_fringe_unchanged(self, rng):
        spec = InterferometerSpec.ideal()
        ideal = phase_scan(spec, JonesMatrix.identity(), spec)
        for _ in range(100):
            alice = InterferometerSpec(
                short_arm=random_birefringence(rng),
                long_arm=random_birefringence(rng),
                modulator_loss_db=0.0,
            )
            bob = InterferometerSpec(
                short_arm=random_birefringence(rng),
                long_arm=random_birefringence(rng),
                modulator_loss_db=0.0,
            )
            scan = phase_scan(alice, random_birefringence(rng), bob)
            np.testing.assert_allclose(scan, ideal, atol=1e-12)
            assert visibility(scan) == pytest.approx(1.0, abs=1e-9)

    def test_plain_mirrors_fade(self, rng):
        worst = 1.0
        for _ in range(100):
            alice = InterferometerSpec(
                short_arm=random_birefringence(rng),
                long_arm=random_birefringence(rng),
                modulator_loss_db=0.0,
                short_mirror=MirrorKind.PLAIN,
                long_mirror=MirrorKind.PLAIN,
            )
            bob = InterferometerSpec(
                short_arm=random_birefringence(rng),
                long_arm=random_birefringence(rng),
                modulator_loss_db=0.0,
                short_mirror=MirrorKind.PLAIN,
                long_mirror=MirrorKind.PLAIN,
            )
            worst = min(worst, visibility(phase_scan(alice, random_birefringence(rng), bob)))
        assert worst < 0.5

    def test_equal_modulator_losses_keep_full_visibility(self):
        spec = InterferometerSpec(modulator_loss_db=3.0)
        assert visibility(phase_scan(spec, JonesMatrix.identity(), spec)) == pytest.approx(
            1.0, abs=1e-9
        )


class TestFringeModel:
    def test_matches_jones_model(self, lossless_link):
        model = fringe_model()
        for delta in np.linspace(-np.pi, np.pi, 13):
            exact = central_bin_probability(delta, 0.0, lossless_link)
            assert float(model(delta)) == pytest.approx(exact, abs=1e-12)

    def test_origin_is_pi_with_symmetric_coupler(self):
        assert abs(wrap_phase(fringe_origin() - np.pi)) < 1e-12
        assert fringe_model().visibility == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", [0, 1, 7, 12345])
    def test_fiber_birefringence_leaves_faraday_fringe_unchanged(self, seed):
        link = LinkParams(fiber=FiberSpec(birefringence_seed=seed))
        model, ideal = link_fringe(link), fringe_model()
        phases = np.linspace(-np.pi, np.pi, 13)
        np.testing.assert_allclose(model(phases), ideal(phases), atol=1e-12)

    def test_birefringence_seed_shapes_plain_mirror_fringe(self):
        arms = np.random.default_rng(99)
        plain = InterferometerSpec(
            short_arm=random_birefringence(arms),
            long_arm=random_birefringence(arms),
            short_mirror=MirrorKind.PLAIN,
            long_mirror=MirrorKind.PLAIN,
            modulator_loss_db=0.0,
        )
        visibilities = {
            round(link_fringe(LinkParams(fiber=FiberSpec(birefringence_seed=s)), plain, plain)
                  .visibility, 9)
            for s in range(5)
        }
        assert len(visibilities) > 1


@pytest.mark.parametrize(
    ("phase", "wrapped"),
    [(np.pi, np.pi), (-np.pi, np.pi), (3 * np.pi, np.pi), (0.5, 0.5), (2 * np.pi + 0.1, 0.1)],
)
def test_wrap_phase(phase, wrapped):
    assert wrap_phase(phase) == pytest.approx(wrapped)


def test_link_length_only_scales_probability():
    near = LinkParams(fiber=FiberSpec(length=10.0))
    far = LinkParams(fiber=FiberSpec(length=60.0))
    ratio = central_bin_probability(2.0, 0.5, far) / central_bin_probability(2.0, 0.5, near)
    assert ratio == pytest.approx(10 ** (-50 * 0.208 / 10), rel=1e-9)
