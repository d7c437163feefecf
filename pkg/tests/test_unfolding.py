import numpy as np
import pytest

from gfdecode.channels import AwgnChannel, MimoChannel, sample_mimo
from gfdecode.decoder import DecoderSchedule, dgf_decode
from gfdecode.ldpc import gf2_nullspace, random_codeword
from gfdecode.unfolding import (
    SampleGenerator,
    UnfoldedModel,
    UnfoldTrainConfig,
    model_loss_and_grads,
    schedule_loss_and_grads,
    softplus,
    softplus_inv,
    train_unfolded,
    unfolded_loss,
)


def awgn_batch(H, basis, sigma2, rng, size):
    ch = AwgnChannel(sigma2)
    batch = []
    for _ in range(size):
        x = random_codeword(basis, rng)
        batch.append((x, ch.transmit(x, rng), ch))
    return batch


class TestSoftplus:
    def test_roundtrip(self):
        p = np.array([0.01, 0.05, 1.0, 2.5, 10.0])
        assert np.allclose(softplus(softplus_inv(p)), p, rtol=1e-14)

    def test_positive_output(self):
        assert np.all(softplus(np.array([-50.0, 0.0, 50.0])) > 0)


class TestLossBasics:
    def test_zero_noise_fixed_point(self, h3x6):
        # noiseless observation started at the codeword stays there
        basis = gf2_nullspace(h3x6)
        x = random_codeword(basis, np.random.default_rng(0))
        ch = AwgnChannel(1.0)
        sched = DecoderSchedule.constant(5, eta=0.1, project=False)
        model = UnfoldedModel.from_schedule(sched)
        loss = unfolded_loss(model, [(x, x.copy(), ch)], h3x6, x0=x.copy())
        assert loss < 1e-25

    def test_vanishing_steps_leave_initial_point(self, h3x6):
        basis = gf2_nullspace(h3x6)
        rng = np.random.default_rng(1)
        batch = awgn_batch(h3x6, basis, 0.5, rng, 4)
        sched = DecoderSchedule.constant(5, eta=1e-300, project=False)
        model = UnfoldedModel.from_schedule(sched)
        loss = unfolded_loss(model, batch, h3x6)
        expect = np.mean([np.sum(x ** 2) for x, _, _ in batch])
        assert abs(loss - expect) < 1e-9

    def test_init_reproduces_plain_dgf(self, code48):
        # softplus(softplus^-1) round-trips, so the untrained model decodes
        # like the schedule it was built from
        basis = gf2_nullspace(code48)
        rng = np.random.default_rng(2)
        ch = AwgnChannel(0.5)
        x = random_codeword(basis, rng)
        y = ch.transmit(x, rng)
        base = DecoderSchedule.constant(20, eta=0.05, gamma=1.0, alpha=1.0,
                                        beta=2.0, project=False)
        model = UnfoldedModel.from_schedule(base)
        s_base, _ = dgf_decode(y, ch, code48, base, np.zeros(code48.n))
        s_model, _ = dgf_decode(y, ch, code48, model.schedule(project=False),
                                np.zeros(code48.n))
        assert np.allclose(s_base, s_model, rtol=0, atol=1e-12)


class TestGradientOracle:
    @pytest.mark.parametrize("channel", ["awgn", "mimo"])
    def test_matches_finite_differences(self, h3x6, channel):
        # reverse-mode schedule gradients vs central differences, U = 5
        rng = np.random.default_rng(3)
        basis = gf2_nullspace(h3x6)
        if channel == "awgn":
            ch = AwgnChannel(0.5)
            batch = awgn_batch(h3x6, basis, 0.5, rng, 3)
        else:
            batch = []
            for _ in range(3):
                x = random_codeword(basis, rng)
                ch = sample_mimo(3, 3, 4.0, rng)
                batch.append((x, ch.transmit(x, rng), ch))
        U = 5
        etas = np.full(U, 0.08) * rng.uniform(0.5, 1.5, U)
        gammas = np.full(U, 1.0) * rng.uniform(0.5, 1.5, U)
        alphas = np.full(U, 1.0) * rng.uniform(0.5, 1.5, U)
        betas = np.full(U, 2.0) * rng.uniform(0.5, 1.5, U)

        loss, grads = schedule_loss_and_grads(etas, gammas, alphas, betas,
                                              batch, h3x6)
        arrays = [etas, gammas, alphas, betas]
        step = 1e-6
        for fam, (arr, g) in enumerate(zip(arrays, grads)):
            for k in [0, 2, 4]:
                old = arr[k]
                arr[k] = old + step
                up, _ = schedule_loss_and_grads(*arrays, batch, h3x6)
                arr[k] = old - step
                down, _ = schedule_loss_and_grads(*arrays, batch, h3x6)
                arr[k] = old
                fd = (up - down) / (2 * step)
                assert abs(g[k] - fd) < 1e-3 * max(1.0, abs(fd)), (
                    f"family {fam} layer {k}: adjoint {g[k]} vs fd {fd}"
                )

    def test_theta_chain_rule(self, h3x6):
        rng = np.random.default_rng(4)
        basis = gf2_nullspace(h3x6)
        batch = awgn_batch(h3x6, basis, 0.5, rng, 2)
        sched = DecoderSchedule.constant(4, eta=0.07, beta=2.0, project=False)
        model = UnfoldedModel.from_schedule(sched)
        loss, dtheta = model_loss_and_grads(model, batch, h3x6)
        step = 1e-6
        for row in range(4):
            k = 1
            old = model.theta[row, k]
            model.theta[row, k] = old + step
            up = unfolded_loss(model, batch, h3x6)
            model.theta[row, k] = old - step
            down = unfolded_loss(model, batch, h3x6)
            model.theta[row, k] = old
            fd = (up - down) / (2 * step)
            assert abs(dtheta[row, k] - fd) < 1e-3 * max(1.0, abs(fd))

    def test_frozen_families_get_zero_gradient(self, h3x6):
        rng = np.random.default_rng(5)
        basis = gf2_nullspace(h3x6)
        batch = awgn_batch(h3x6, basis, 0.5, rng, 2)
        sched = DecoderSchedule.constant(4, eta=0.07, project=False)
        model = UnfoldedModel.from_schedule(sched, trainable=("eta",))
        _, dtheta = model_loss_and_grads(model, batch, h3x6)
        assert np.any(dtheta[0] != 0)
        assert np.array_equal(dtheta[1:], np.zeros_like(dtheta[1:]))


class TestTraining:
    def test_loss_decreases_on_awgn(self, code48):
        basis = gf2_nullspace(code48)
        ch = AwgnChannel(0.4)

        def draw(r):
            x = random_codeword(basis, r)
            return x, ch.transmit(x, r), ch

        gen = SampleGenerator(code48, draw)
        base = DecoderSchedule.constant(10, eta=0.05, beta=2.0, project=False)
        model = UnfoldedModel.from_schedule(base)
        rng = np.random.default_rng(6)
        before = np.mean(
            [unfolded_loss(model, gen(rng, 16), code48) for _ in range(4)]
        )
        report = train_unfolded(
            model, gen, UnfoldTrainConfig(iterations=60, batch=8, lr=0.02),
            np.random.default_rng(7), incremental=False,
        )
        rng = np.random.default_rng(6)
        after = np.mean(
            [unfolded_loss(report.model, gen(rng, 16), code48) for _ in range(4)]
        )
        assert after < before
        assert report.losses[-10:].mean() < report.losses[:10].mean()

    def test_incremental_stages_run(self, h3x6):
        basis = gf2_nullspace(h3x6)
        ch = AwgnChannel(0.5)

        def draw(r):
            x = random_codeword(basis, r)
            return x, ch.transmit(x, r), ch

        gen = SampleGenerator(h3x6, draw)
        base = DecoderSchedule.constant(4, eta=0.05, project=False)
        model = UnfoldedModel.from_schedule(base)
        report = train_unfolded(
            model, gen, UnfoldTrainConfig(iterations=10, batch=4, lr=0.01),
            np.random.default_rng(8), incremental=True,
        )
        assert len(report.losses) > 0

    def test_trained_schedule_is_deterministic(self, h3x6):
        basis = gf2_nullspace(h3x6)
        ch = AwgnChannel(0.5)

        def draw(r):
            x = random_codeword(basis, r)
            return x, ch.transmit(x, r), ch

        gen = SampleGenerator(h3x6, draw)
        base = DecoderSchedule.constant(3, eta=0.05, project=False)

        def run():
            model = UnfoldedModel.from_schedule(base)
            train_unfolded(model, gen,
                           UnfoldTrainConfig(iterations=8, batch=4, lr=0.01),
                           np.random.default_rng(9), incremental=False)
            return model.theta.copy()

        assert np.array_equal(run(), run())
