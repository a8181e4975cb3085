import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cogmiso.beamforming import (BeamSet, ChannelRealization, interference, null_space,
                                 sinr, sinr_batch, sum_rate, zf_beams_batch, zfbf_beams)
from cogmiso.channel_model import (Codebook, QuantizedCsi, generate_codebook, normalize,
                                   quantize, sample_channel, sample_channels)
from cogmiso.errors import DegenerateGeometryError, InvalidParameterError


def perfect(h):
    """Quantized CSI equal to the true direction."""
    return quantize(Codebook(0, normalize(h)[None, :]), h)


def slot(rng, n_t=5, mode=2, b=2, c=2):
    g = sample_channel(n_t, rng)
    users = sample_channels(rng, mode, n_t)
    qg = quantize(generate_codebook(n_t, b, rng), g)
    qu = [quantize(generate_codebook(n_t, c, rng), h) for h in users]
    return g, users, qg, qu


class TestNullSpace:
    def test_dimension_and_orthogonality(self, rng):
        a = sample_channels(rng, 3, 5)
        basis = null_space(a)
        assert basis.shape == (5, 2)
        np.testing.assert_allclose(a.conj() @ basis, 0.0, atol=1e-12)
        np.testing.assert_allclose(basis.conj().T @ basis, np.eye(2), atol=1e-12)

    def test_rank_deficient(self, rng):
        v = sample_channel(4, rng)
        assert null_space(np.stack([v, 2 * v])).shape == (4, 3)


class TestZfbf:
    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), mode=st.integers(2, 4))
    def test_orthogonality(self, seed, mode):
        rng = np.random.default_rng(seed)
        _, _, qg, qu = slot(rng, mode=mode)
        w = zfbf_beams(qg, qu, mode, rng).beams
        np.testing.assert_allclose(np.linalg.norm(w, axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(w @ qg.codeword.conj(), 0.0, atol=1e-12)
        for m in range(mode):
            for k in range(mode):
                if k != m:
                    assert abs(np.vdot(qu[k].codeword, w[m])) < 1e-12

    def test_full_mode_unique_up_to_phase(self, rng):
        _, _, qg, qu = slot(rng, mode=4)
        a = zfbf_beams(qg, qu, 4, np.random.default_rng(1)).beams
        b = zfbf_beams(qg, qu, 4, np.random.default_rng(2)).beams
        np.testing.assert_allclose(np.abs(np.sum(a.conj() * b, axis=1)), 1.0, atol=1e-12)

    def test_rejects_bad_mode(self, rng):
        _, _, qg, qu = slot(rng, mode=2)
        with pytest.raises(InvalidParameterError):
            zfbf_beams(qg, qu, 3, rng)
        with pytest.raises(InvalidParameterError):
            zfbf_beams(qg, qu * 3, 5, rng)

    def test_degenerate_batch(self, rng):
        hhat = sample_channels(rng, (3, 5), 5)
        with pytest.raises(DegenerateGeometryError):
            zf_beams_batch(sample_channels(rng, 3, 5), hhat, rng)

    def test_batch_orthogonality(self, rng):
        ghat = normalize(sample_channels(rng, 50, 5))
        hhat = normalize(sample_channels(rng, (50, 3), 5))
        w = zf_beams_batch(ghat, hhat, rng)
        np.testing.assert_allclose(np.einsum("nd,nmd->nm", ghat.conj(), w), 0.0, atol=1e-12)
        cross = np.einsum("nkd,nmd->nkm", hhat.conj(), w)
        off = cross * (1 - np.eye(3))
        np.testing.assert_allclose(off, 0.0, atol=1e-12)

    def test_isotropic_in_null_space(self):
        # with one constraint in C^n the beam is uniform on the unit sphere of
        # the (n-1)-dim complement, so E|e^H w|^2 = 1/(n-1) for any unit e there
        rng = np.random.default_rng(4)
        n = 20_000
        ghat = np.tile(np.eye(4, dtype=complex)[0], (n, 1))
        hhat = np.tile(np.eye(4, dtype=complex)[1], (n, 1))[:, None, :]
        w = zf_beams_batch(ghat, hhat, rng)[:, 0]
        np.testing.assert_allclose(np.mean(np.abs(w[:, 2]) ** 2), 1 / 3, atol=0.01)


class TestMetrics:
    def test_zero_interference_with_perfect_g(self, rng):
        g, users, _, qu = slot(rng)
        beams = zfbf_beams(perfect(g), qu, 2, rng)
        real = ChannelRealization(users, g, 0.01)
        assert interference(real, beams, 100.0) <= 1e-18

    def test_zero_power(self, rng):
        g, users, qg, qu = slot(rng)
        real = ChannelRealization(users, g, 0.01)
        beams = zfbf_beams(qg, qu, 2, rng)
        assert interference(real, beams, 0.0) == 0.0
        assert sum_rate(real, beams, 0.0, 1.0) == 0.0

    def test_perfect_user_csi(self, rng):
        g, users, qg, _ = slot(rng, mode=3)
        beams = zfbf_beams(qg, [perfect(h) for h in users], 3, rng)
        gains = np.abs(users.conj() @ beams.beams.T) ** 2
        assert np.max(gains * (1 - np.eye(3))) <= 1e-18
        real = ChannelRealization(users, g, 0.01)
        p, noise = 7.0, 0.5
        for m in range(3):
            expect = gains[m, m] * p / (noise * 3)
            np.testing.assert_allclose(sinr(real, beams, m, p, noise), expect, rtol=1e-12)

    def test_high_power_limit(self, rng):
        g, users, qg, qu = slot(rng)
        real = ChannelRealization(users, g, 0.01)
        beams = zfbf_beams(qg, qu, 2, rng)
        gains = np.abs(users.conj() @ beams.beams.T) ** 2
        limit = gains[0, 0] / gains[0, 1]
        np.testing.assert_allclose(sinr(real, beams, 0, 1e12, 1.0), limit, rtol=1e-6)

    def test_sum_rate_unit_sinr(self):
        h = np.eye(2, dtype=complex)[None]
        w = np.eye(2, dtype=complex)[None]
        np.testing.assert_allclose(sinr_batch(h, w, 2.0, 1.0), 1.0)
        real = ChannelRealization(np.eye(2, dtype=complex), np.ones(2, dtype=complex), 0.1)
        assert sum_rate(real, BeamSet(np.eye(2, dtype=complex)), 2.0, 1.0) == pytest.approx(2.0)

    def test_interference_formula(self, rng):
        g, users, qg, qu = slot(rng)
        beams = zfbf_beams(qg, qu, 2, rng)
        real = ChannelRealization(users, g, 0.3)
        expect = 5.0 / 2 * 0.3 * np.sum(np.abs(beams.beams @ g.conj()) ** 2)
        np.testing.assert_allclose(interference(real, beams, 5.0), expect, rtol=1e-12)

    def test_rejects_bad_inputs(self, rng):
        g, users, qg, qu = slot(rng)
        real = ChannelRealization(users, g, 0.01)
        beams = zfbf_beams(qg, qu, 2, rng)
        with pytest.raises(InvalidParameterError):
            interference(real, beams, -1.0)
        with pytest.raises(InvalidParameterError):
            sinr(real, beams, 2, 1.0, 1.0)
        with pytest.raises(InvalidParameterError):
            sinr(real, beams, 0, 1.0, 0.0)
        with pytest.raises(InvalidParameterError):
            ChannelRealization(users, g[:3], 0.01)
