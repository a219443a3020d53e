"""Loss-term tests: KL closed form, intervention shift, method assembly,
and end-to-end analytic gradients."""

import numpy as np
import pytest

from carr.model import init_params
from carr.numkit import ConfigurationError, Rng, grad_check
from carr.objective import (
    METHODS,
    assemble_loss,
    cross_entropy_ll,
    intervene,
    kl_gaussian,
    loss_and_grads,
)


def test_kl_gaussian_matching_prior_is_zero():
    mean = np.zeros((3, 4))
    assert kl_gaussian(mean, np.zeros_like(mean), np.zeros(4)) == 0.0


def test_kl_gaussian_unit_shift():
    # each shifted dimension contributes 1/2
    mean = np.ones((2, 4))
    assert abs(kl_gaussian(mean, np.zeros_like(mean), np.zeros(4)) - 2.0) < 1e-12


def test_kl_gaussian_variance_term():
    # var = 2: per dim 0.5 * (2 - 1 - ln 2)
    mean = np.zeros((1, 3))
    logvar = np.full((1, 3), np.log(2.0))
    expected = 3 * 0.5 * (1.0 - np.log(2.0))
    assert abs(kl_gaussian(mean, logvar, np.zeros(3)) - expected) < 1e-12


def test_kl_gaussian_shape_check():
    with pytest.raises(ConfigurationError):
        kl_gaussian(np.zeros((2, 3)), np.zeros((2, 4)), np.zeros(3))


def test_kl_gaussian_monte_carlo():
    # quick sanity version of the acceptance check
    rng = Rng(0)
    mean = rng.uniform(-1, 1, size=(1, 6))
    logvar = rng.uniform(-1, 1, size=(1, 6))
    prior = rng.uniform(-1, 1, size=6)
    closed = kl_gaussian(mean, logvar, prior)
    std = np.exp(0.5 * logvar)
    draws = mean + std * rng.normal(size=(20000, 6))
    log_q = (-0.5 * ((draws - mean) / std) ** 2 - 0.5 * logvar).sum(axis=1)
    log_p = (-0.5 * (draws - prior) ** 2).sum(axis=1)
    samples = log_q - log_p
    se = samples.std() / np.sqrt(samples.size)
    assert abs(samples.mean() - closed) < 4 * se


def test_intervene_shift():
    z = np.zeros((4, 3))
    y = np.array([0, 1, 0, 1])
    out = intervene(z, y, b=0.8)
    assert np.allclose(out[y == 0], 0.8)
    assert np.allclose(out[y == 1], -0.8)


def test_cross_entropy_ll_uniform():
    assert abs(cross_entropy_ll(np.zeros((2, 2)), [0, 1]) - np.log(0.5)) < 1e-12


def test_assemble_loss_terms():
    out = assemble_loss("carr", positive_ll=-0.4, kl=2.0, negative_ll=-1.5,
                        lam=0.01, neg_weight=0.5)
    assert abs(out.total - (0.4 + 0.02 - 0.75)) < 1e-12
    base = assemble_loss("base", positive_ll=-0.4)
    assert base.total == 0.4 and not base.use_kl


def test_assemble_loss_missing_components():
    with pytest.raises(ConfigurationError):
        assemble_loss("ib", positive_ll=-0.4)
    with pytest.raises(ConfigurationError):
        assemble_loss("carr", positive_ll=-0.4, kl=1.0)
    with pytest.raises(ConfigurationError):
        assemble_loss("vae", positive_ll=-0.4)


def test_lambda_linearity():
    kl = 3.7
    t1 = assemble_loss("ib", positive_ll=-1.0, kl=kl, lam=0.001).total
    t2 = assemble_loss("ib", positive_ll=-1.0, kl=kl, lam=0.201).total
    assert abs((t2 - t1) - 0.2 * kl) < 1e-12


def _batch(seed, n=4, d_in=5, d_z=3):
    rng = Rng(seed, stream=50)
    params = init_params(rng, d_in=d_in, d_z=d_z)
    x = rng.uniform(-1, 1, size=(n, d_in))
    y = rng.integers(0, 2, size=n)
    eps = rng.normal(size=(n, d_z))
    delta = 0.05 * rng.normal(size=(n, d_z))
    neg = 0.05 * rng.normal(size=(n, d_z))
    return params, x, y, eps, delta, neg


@pytest.mark.parametrize("mode", METHODS)
def test_loss_and_grads_finite_difference(mode):
    params, x, y, eps, delta, neg = _batch(seed=3)

    def f(vec):
        params.from_vector(vec)
        breakdown, grad = loss_and_grads(
            params, x, y, mode, eps_std=eps,
            attack_delta=delta if mode in ("rcvae", "carr") else None,
            neg_delta=neg if mode == "carr" else None,
        )
        return breakdown.total, grad

    assert grad_check(f, params.to_vector()) < 1e-4


def test_loss_and_grads_embeddings_gradcheck():
    rng = Rng(9, stream=50)
    params = init_params(rng, vocab=(4, 5), d_z=3)
    x = np.stack([rng.integers(0, 4, size=4), rng.integers(0, 5, size=4)], axis=1)
    y = rng.integers(0, 2, size=4)
    eps = rng.normal(size=(4, 3))

    def f(vec):
        params.from_vector(vec)
        breakdown, grad = loss_and_grads(params, x, y, "ib", eps_std=eps)
        return breakdown.total, grad

    assert grad_check(f, params.to_vector()) < 1e-4


def test_carr_zero_neg_weight_equals_rcvae():
    params, x, y, eps, delta, neg = _batch(seed=4)
    vec = params.to_vector()
    b1, g1 = loss_and_grads(params, x, y, "carr", eps_std=eps, attack_delta=delta,
                            neg_delta=neg, neg_weight=0.0)
    params.from_vector(vec)
    b2, g2 = loss_and_grads(params, x, y, "rcvae", eps_std=eps, attack_delta=delta)
    assert abs(b1.total - b2.total) < 1e-12  # negative term weighted to nothing
    assert np.allclose(g1, g2, atol=1e-15)


def test_stop_grad_negative_matches_rcvae_encoder_path():
    # with the negative branch detached from the encoder, the encoder slice
    # of the gradient must coincide with the rcvae gradient
    params, x, y, eps, delta, neg = _batch(seed=5)
    vec = params.to_vector()
    enc_size = (params.enc_hidden.weights.size + params.enc_hidden.bias.size
                + params.enc_head.weights.size + params.enc_head.bias.size)
    _, g_carr = loss_and_grads(params, x, y, "carr", eps_std=eps,
                               attack_delta=delta, neg_delta=neg,
                               stop_grad_negative=True)
    params.from_vector(vec)
    _, g_rcvae = loss_and_grads(params, x, y, "rcvae", eps_std=eps,
                                attack_delta=delta)
    assert np.allclose(g_carr[:enc_size], g_rcvae[:enc_size], atol=1e-15)
    assert not np.allclose(g_carr[enc_size:], g_rcvae[enc_size:])


def test_attack_delta_is_constant_offset():
    # shifting z by a constant changes the loss value, not the treatment of
    # the shift itself: gradients must still pass the finite-difference check
    params, x, y, eps, delta, _ = _batch(seed=6)
    b_clean, _ = loss_and_grads(params, x, y, "rcvae", eps_std=eps)
    b_shift, _ = loss_and_grads(params, x, y, "rcvae", eps_std=eps,
                                attack_delta=delta)
    assert b_clean.total != b_shift.total
    assert b_clean.kl == b_shift.kl  # KL sees the unshifted posterior
