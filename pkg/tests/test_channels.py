import numpy as np
import pytest

from gfdecode.channels import (
    AwgnChannel,
    MimoChannel,
    awgn_grad,
    awgn_transmit,
    load_channel,
    mmse_detect,
    sample_mimo,
    save_channel,
    snr_convert,
)


class TestAwgn:
    def test_degenerate_sigma_is_exact(self):
        x = np.array([1.0, -1.0, 1.0])
        y = awgn_transmit(x, 0.0, np.random.default_rng(0))
        assert np.array_equal(y, x)

    def test_sample_statistics(self):
        rng = np.random.default_rng(42)
        sigma2 = 0.37
        x = np.ones(10)
        noise = np.concatenate(
            [awgn_transmit(x, sigma2, rng) - x for _ in range(10_000)]
        )
        assert abs(noise.var() - sigma2) / sigma2 < 0.02
        assert abs(noise.mean()) < 3 * np.sqrt(sigma2) / np.sqrt(noise.size)

    def test_grad_values(self):
        assert np.array_equal(awgn_grad(np.ones(3), np.ones(3)), np.zeros(3))
        g = awgn_grad(np.zeros(2), np.array([0.6027, 0.8244]))
        assert np.array_equal(g, [-0.6027, -0.8244])

    def test_grad_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        x, y = rng.normal(size=4), rng.normal(size=4)
        step = 1e-6
        for j in range(4):
            e = np.zeros(4)
            e[j] = step
            fd = (np.sum((x + e - y) ** 2) - np.sum((x - e - y) ** 2)) / (4 * step)
            assert abs(awgn_grad(x, y)[j] - fd) < 1e-8

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            awgn_grad(np.zeros(2), np.zeros(3))

    def test_channel_requires_positive_variance(self):
        with pytest.raises(ValueError):
            AwgnChannel(0.0)


class TestMimoConstruction:
    def test_sigma_w2_relation(self):
        ch = sample_mimo(2, 2, 2.0, np.random.default_rng(0))
        assert ch.N == 4 and ch.sigma_w2 == 2.0

    def test_block_structure(self):
        ch = sample_mimo(3, 2, 1.0, np.random.default_rng(5))
        A, Ac = ch.A, ch.A_complex
        assert np.array_equal(A[:3, :2], Ac.real)
        assert np.array_equal(A[:3, 2:], -Ac.imag)
        assert np.array_equal(A[3:, :2], Ac.imag)
        assert np.array_equal(A[3:, 2:], Ac.real)

    def test_omega_definition(self):
        ch = sample_mimo(4, 4, 1.0, np.random.default_rng(7))
        evals = np.linalg.eigvalsh(ch.A.T @ ch.A)
        assert abs(ch.omega * (evals[0] + evals[-1]) - 2.0) < 1e-10

    def test_entry_statistics(self):
        # CN(0,1) entries: real and imaginary parts each N(0, 1/2)
        ch = sample_mimo(60, 60, 1.0, np.random.default_rng(11))
        parts = np.concatenate([ch.A_complex.real.ravel(), ch.A_complex.imag.ravel()])
        assert abs(parts.var() - 0.5) / 0.5 < 0.05

    def test_noise_component_variance(self):
        ch = sample_mimo(50, 50, 4.0, np.random.default_rng(3))
        rng = np.random.default_rng(13)
        x = np.zeros(ch.n)
        ch0 = MimoChannel(np.zeros((50, 50)) + 0j, ch.sigma_w2)
        samples = np.concatenate([ch0.transmit(x, rng) for _ in range(200)])
        expect = ch.sigma_w2 / 2
        assert abs(samples.var() - expect) / expect < 0.05


class TestMimoGrad:
    def test_identity_reduces_to_awgn(self):
        ch = MimoChannel(np.eye(3) + 0j, 1.0)
        rng = np.random.default_rng(2)
        x, y = rng.normal(size=6), rng.normal(size=6)
        assert np.allclose(ch.grad(x, y), awgn_grad(x, y))

    def test_zero_residual(self):
        ch = sample_mimo(3, 3, 1.0, np.random.default_rng(4))
        x = np.random.default_rng(5).normal(size=ch.n)
        y = ch.A @ x
        assert np.abs(ch.grad(x, y)).max() < 1e-12

    def test_matches_finite_differences(self):
        ch = sample_mimo(4, 3, 1.0, np.random.default_rng(6))
        rng = np.random.default_rng(7)
        x, y = rng.normal(size=ch.n), rng.normal(size=ch.N)
        g = ch.grad(x, y)
        step = 1e-6
        for j in range(ch.n):
            e = np.zeros(ch.n)
            e[j] = step
            fd = (
                np.sum((y - ch.A @ (x + e)) ** 2) - np.sum((y - ch.A @ (x - e)) ** 2)
            ) / (4 * step)
            assert abs(g[j] - fd) < 1e-6

    def test_affine_superposition(self):
        ch = sample_mimo(3, 3, 1.0, np.random.default_rng(8))
        rng = np.random.default_rng(9)
        x1, x2 = rng.normal(size=ch.n), rng.normal(size=ch.n)
        y1, y2 = rng.normal(size=ch.N), rng.normal(size=ch.N)
        assert np.allclose(
            ch.grad(x1, y1) + ch.grad(x2, y2), ch.grad(x1 + x2, y1 + y2)
        )

    def test_step_size_contracts(self):
        ch = sample_mimo(8, 4, 1.0, np.random.default_rng(10))
        M = np.eye(ch.n) - ch.omega * ch.A.T @ ch.A
        assert np.abs(np.linalg.eigvalsh(M)).max() < 1.0


class TestMmse:
    def test_identity_shrinkage(self):
        ch = MimoChannel(np.eye(4) + 0j, 0.6)
        y = np.arange(8.0)
        assert np.allclose(ch.mmse_detect(y), y / 1.3)

    def test_noiseless_limit_inverts(self):
        ch0 = sample_mimo(3, 3, 1.0, np.random.default_rng(12))
        ch = MimoChannel(ch0.A_complex, 1e-8)
        x = np.random.default_rng(13).normal(size=ch.n)
        y = ch.A @ x
        assert np.abs(ch.mmse_detect(y) - x).max() < 1e-5

    def test_equals_ridge_solution(self):
        ch = sample_mimo(5, 4, 2.0, np.random.default_rng(14))
        y = np.random.default_rng(15).normal(size=ch.N)
        s = ch.sigma_w2 / 2
        ridge = np.linalg.solve(ch.A.T @ ch.A + s * np.eye(ch.n), ch.A.T @ y)
        assert np.abs(ch.mmse_detect(y) - ridge).max() < 1e-8

    def test_local_optimality_of_regularized_objective(self):
        ch = sample_mimo(4, 4, 1.0, np.random.default_rng(16))
        rng = np.random.default_rng(17)
        y = rng.normal(size=ch.N)
        xhat = ch.mmse_detect(y)
        s = ch.sigma_w2 / 2

        def obj(x):
            return np.sum((y - ch.A @ x) ** 2) + s * np.sum(x ** 2)

        base = obj(xhat)
        for _ in range(50):
            d = rng.normal(size=ch.n)
            d *= 1e-3 / np.linalg.norm(d)
            assert obj(xhat + d) >= base - 1e-12
            assert obj(xhat - d) >= base - 1e-12


class TestSnrConvert:
    def test_mimo_example(self):
        assert snr_convert("mimo", 2.0, N=4) == 2.0

    def test_awgn_zero_db(self):
        assert abs(snr_convert("awgn", 0.0, rate=0.5) - 1.0) < 1e-15

    def test_awgn_three_db(self):
        assert abs(snr_convert("awgn", 3.010, rate=0.5) - 0.5) < 1e-3

    def test_errors(self):
        with pytest.raises(ValueError):
            snr_convert("mimo", -1.0, N=4)
        with pytest.raises(ValueError):
            snr_convert("awgn", 0.0, rate=0.0)
        with pytest.raises(ValueError):
            snr_convert("other", 1.0)


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        ch = sample_mimo(3, 2, 2.5, np.random.default_rng(18))
        path = tmp_path / "chan.bin"
        save_channel(ch, path)
        again = load_channel(path)
        assert np.array_equal(again.A, ch.A)
        assert again.sigma_w2 == ch.sigma_w2
        y = np.random.default_rng(19).normal(size=ch.N)
        assert np.array_equal(mmse_detect(again, y), mmse_detect(ch, y))

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"nope\n")
        with pytest.raises(ValueError):
            load_channel(path)
