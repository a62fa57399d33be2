import math

import numpy as np
import pytest
from scipy.integrate import quad

from sopgate import (
    Protocol,
    Pulse,
    PulseEnvelope,
    SopGateError,
    StepTooLargeError,
    StructuralVector,
    build_jp_protocol,
    build_sop3_protocol,
    build_sop_protocol,
    envelopes_for_protocol,
    integrate_block,
    sequence_amplitude,
    validate_protocol,
)
from sopgate.propagator import block_decompose, star_propagator, u11v_esop, u11v_esop_exact
from sopgate.model import build_esop_protocol, make_structural_vector

PI = math.pi


def random_protocol(rng):
    n_qubits = int(rng.integers(2, 4))
    n_pulses = int(rng.integers(2, 6))
    pulses = []
    for _ in range(n_pulses):
        v = rng.normal(size=n_qubits)
        v /= np.linalg.norm(v)
        pulses.append(Pulse(float(rng.uniform(-8 * PI, 8 * PI)), StructuralVector(tuple(v))))
    return Protocol(tuple(pulses), n_qubits)


class TestEnvelopes:
    @pytest.mark.parametrize("shape", ["squared-sine", "gaussian"])
    @pytest.mark.parametrize("area", [PI, -6.1 * PI, 0.9 * PI])
    def test_area_normalization(self, shape, area):
        env = PulseEnvelope.from_area(shape, 0.0, 1.0, area)
        integral, _ = quad(lambda t: float(env.rabi(t)), 0.0, 1.0, limit=200)
        assert integral == pytest.approx(area, abs=1e-10)
        assert env.area == pytest.approx(area, abs=1e-10)

    def test_zero_outside_window(self):
        env = PulseEnvelope.from_area("gaussian", 1.0, 2.0, PI)
        assert env.rabi(0.99) == 0.0
        assert env.rabi(3.01) == 0.0

    def test_unknown_shape_rejected(self):
        with pytest.raises(SopGateError):
            PulseEnvelope.from_area("boxcar", 0.0, 1.0, PI)

    def test_protocol_envelopes_do_not_overlap(self):
        envelopes = envelopes_for_protocol(build_jp_protocol())
        for prev, nxt in zip(envelopes, envelopes[1:]):
            assert nxt.start_time >= prev.end_time

    def test_overlap_rejected(self):
        block = block_decompose(build_jp_protocol())[1]
        envs = [
            PulseEnvelope.from_area("squared-sine", 0.0, 1.0, PI),
            PulseEnvelope.from_area("squared-sine", 0.5, 1.0, 2 * PI),
            PulseEnvelope.from_area("squared-sine", 2.0, 1.0, PI),
        ]
        with pytest.raises(SopGateError):
            integrate_block(block, envs)


class TestIntegrateBlock:
    def test_pi_pulse_matches_analytic(self):
        block = block_decompose(build_jp_protocol())[1]  # |01>: coupling (1, 0, 1) per pulse
        single = type(block)(initial_state="01", zero_qubits=(0,), couplings=np.array([[1.0]]))
        env = [PulseEnvelope.from_area("squared-sine", 0.0, 1.0, PI)]
        u_num = integrate_block(single, env)
        np.testing.assert_allclose(u_num, star_propagator((1.0,), PI / 2), atol=1e-6)

    def test_output_unitary(self):
        protocol = build_sop_protocol(math.sqrt(0.1))
        block = block_decompose(protocol)[0]
        u_num = integrate_block(block, envelopes_for_protocol(protocol))
        np.testing.assert_allclose(u_num.conj().T @ u_num, np.eye(3), atol=1e-8)

    def test_step_too_large(self):
        protocol = build_sop_protocol(0.0, (8 * PI, 16 * PI, 8 * PI))
        block = block_decompose(protocol)[0]
        with pytest.raises(StepTooLargeError):
            integrate_block(block, envelopes_for_protocol(protocol), dt=1.0 / 12)

    def test_fourth_order_convergence(self):
        protocol = build_sop_protocol(math.sqrt(0.2), (2.2 * PI, 1.1 * PI, 2.2 * PI))
        block = block_decompose(protocol)[0]
        envelopes = envelopes_for_protocol(protocol)
        exact = sequence_amplitude(protocol, "00")
        errors = [
            abs(integrate_block(block, envelopes, dt=dt)[0, 0] - exact)
            for dt in (1 / 100, 1 / 200)
        ]
        assert errors[0] / errors[1] == pytest.approx(16.0, rel=0.25)


class TestValidateProtocol:
    def test_symmetric_orthogonal_protocol(self):
        report = validate_protocol(build_sop_protocol(math.sqrt(0.1)))
        assert report.passed
        assert report.max_deviation < 1e-6

    def test_all_ones_state_exact(self):
        report = validate_protocol(build_sop3_protocol(0.3, 0.2))
        assert report.deviations["111"] == 0.0

    def test_envelope_shape_independence(self):
        protocol = build_sop_protocol(math.sqrt(0.1), (1.3 * PI, 0.7 * PI, 1.3 * PI))
        blocks = block_decompose(protocol)
        env_sin = envelopes_for_protocol(protocol, shape="squared-sine")
        env_gau = envelopes_for_protocol(protocol, shape="gaussian")
        for block in blocks:
            amp_sin = integrate_block(block, env_sin)[0, 0]
            amp_gau = integrate_block(block, env_gau)[0, 0]
            assert abs(amp_sin - amp_gau) < 1e-6

    def test_random_protocols(self):
        rng = np.random.default_rng(123)
        for _ in range(5):
            report = validate_protocol(random_protocol(rng))
            assert report.passed, report.deviations

    def test_report_fields(self):
        report = validate_protocol(build_jp_protocol(), tolerance=1e-6)
        data = report.to_json_dict()
        assert set(data) == {
            "max_deviation",
            "tolerance",
            "passed",
            "per_state_deviation",
            "settings",
        }
        assert set(data["per_state_deviation"]) == {"00", "01", "10", "11"}


class TestEsopGroundTruth:
    """Settle which M = 4, 5 expression the dynamics actually follows."""

    @pytest.mark.parametrize("m", [4, 5])
    def test_time_domain_follows_matrix_product_not_printed_form(self, m):
        e_odd = make_structural_vector((math.sqrt(0.9), math.sqrt(0.1)))
        protocol = build_esop_protocol(m, e_odd, (0.9 * PI, 1.3 * PI))
        theta_odd, theta_even = 0.45 * PI, 0.65 * PI
        block = [b for b in block_decompose(protocol) if b.initial_state == "00"][0]
        numeric = integrate_block(block, envelopes_for_protocol(protocol))[0, 0]
        exact = u11v_esop_exact(m, theta_odd, theta_even)
        printed = u11v_esop(m, theta_odd, theta_even)
        assert abs(numeric.real - exact) < 1e-6
        assert abs(numeric.real - printed) > 0.1
