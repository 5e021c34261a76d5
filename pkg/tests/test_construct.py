import numpy as np
import pytest

from crseq.construct import (
    SynthesisError,
    block_spectra,
    synthesize,
    tf_lattice,
    verify_theorem1,
)
from crseq.seeds import (
    ZCZSeedSet,
    builtin_zcz,
    freq_shift_zcz,
    make_seed_set,
    masked_waveform,
    random_waveform,
    zadoff_chu,
    zc_waveforms,
)
from crseq.seqcore import SpectrumMask, dft, papr

from oracles import accf_loop, pccf_loop


def test_example2_parameters(qset2):
    assert qset2.params == (4, 1024, 128)
    assert qset2.sequences.shape == (4, 1024)
    assert not qset2.shared_waveform


def test_example2_pccf_c1_c4_zero_in_zone(qset2):
    c1, c4 = qset2.sequences[0], qset2.sequences[3]
    R = np.array([np.vdot(np.roll(c4, -t), c1) for t in range(-128, 129)])
    scale = np.linalg.norm(c1) * np.linalg.norm(c4)
    assert np.abs(R).max() / scale <= 1e-9


def test_example2_report_passes(qset2):
    rep = verify_theorem1(qset2)
    assert rep.passed
    assert rep.cross_pass and rep.auto_pass and rep.leakage_pass
    assert rep.max_cross <= 1e-9
    assert rep.as_dict()["passed"] is True


def test_example2_zone_is_tight(qset2):
    """Just outside the zone the cross-correlation of some pair is nonzero."""
    s = qset2.sequences
    e = np.linalg.norm(s[0]) ** 2
    outside = max(abs(np.vdot(np.roll(s[j], -129), s[i])) for i in range(4) for j in range(4) if i != j)
    assert outside / e > 1e-6


def test_parallel_report_matches_serial(qset2):
    a = verify_theorem1(qset2, workers=1)
    b = verify_theorem1(qset2, workers=3)
    assert a.max_cross == b.max_cross


def test_single_sequence_set_skips_cross():
    seed = freq_shift_zcz(16, 1, 1)
    mask = SpectrumMask.from_holes(8, [3])
    q = synthesize(seed, masked_waveform(zadoff_chu(8, 1), mask))
    rep = verify_theorem1(q)
    assert rep.max_cross is None and rep.cross_pass is None
    assert rep.passed


def test_zone_one_seed_warns_and_has_empty_zone():
    seed = make_seed_set([[1, 1], [1, -1]], 1)
    mask = SpectrumMask.full(4)
    with pytest.warns(UserWarning):
        q = synthesize(seed, masked_waveform(zadoff_chu(4, 1), mask))
    assert q.zccz_width == 0


def test_random_small_set_matches_double_loop(rng):
    """(2, 8, 2) brute force: every in-zone cross term and the auto factorization by literal loops."""
    seed = freq_shift_zcz(4, 2, 1)  # K=2, L=4, Z=2
    mask = SpectrumMask.from_holes(2, [])
    for _ in range(3):
        wfs = [random_waveform(mask, rng) for _ in range(2)]
        q = synthesize(seed, wfs)
        c = q.sequences
        N, zone = 2, q.zccz_width
        assert zone == 2
        for t in range(-zone, zone + 1):
            assert abs(pccf_loop(c[0], c[1], t)) <= 1e-12
        for i in range(2):
            a, b = seed.sequences[i], wfs[i].b
            ea = sum(abs(x) ** 2 for x in a)
            for t in range(N):
                assert abs(pccf_loop(c[i], c[i], t) - ea * accf_loop(b, b, t)) <= 1e-12
            for t in range(N, zone + 1):
                assert abs(pccf_loop(c[i], c[i], t)) <= 1e-12


def test_report_flags_a_broken_set(qset2):
    s = np.array(qset2.sequences)
    s[1, 5] += 0.3
    broken = type(qset2)(s, qset2.seed, qset2.waveforms, qset2.mask)
    rep = verify_theorem1(broken)
    assert not rep.passed
    assert not rep.cross_pass


def test_shared_waveform_broadcast(mask2):
    seed = builtin_zcz("example2")
    wf = zc_waveforms(mask2, [9])[0]
    q1 = synthesize(seed, wf)
    q2 = synthesize(seed, [wf])
    assert q1.shared_waveform and q2.shared_waveform
    assert np.array_equal(q1.sequences, q2.sequences)
    assert verify_theorem1(q1).passed


def test_sequences_are_read_only(qset2):
    with pytest.raises(ValueError):
        qset2.sequences[0, 0] = 1


def test_energy_is_product(qset2):
    for i in range(qset2.K):
        a, b = qset2.seed.sequences[i], qset2.waveforms[i].b
        assert np.vdot(qset2.sequences[i], qset2.sequences[i]).real == pytest.approx(
            np.vdot(a, a).real * np.vdot(b, b).real
        )


def test_every_block_is_nulled(qset2):
    for c in qset2.sequences:
        spec = block_spectra(c, qset2.N)
        assert spec.shape == (16, 64)
        assert np.abs(spec[:, qset2.mask.holes]).max() <= 1e-12


def test_papr_inherited_from_waveform(qset2):
    # binary seed entries only flip block signs, so the peak-to-average ratio is the waveform's
    for c, w in zip(qset2.sequences, qset2.waveforms):
        assert papr(c) == pytest.approx(papr(w.b), abs=1e-9)


def test_tf_lattice(qset2):
    lat = tf_lattice(0, qset2)
    assert lat.shape == (16, 64)
    assert np.all(lat[:, qset2.mask.holes] == 0)
    assert np.allclose(lat[3], qset2.seed.sequences[0][3] * qset2.waveforms[0].B)
    # each row is the spectrum of the corresponding time block
    assert np.allclose(block_spectra(qset2.sequences[0], 64), lat, atol=1e-12)
    with pytest.raises(IndexError):
        tf_lattice(4, qset2)
    with pytest.raises(IndexError):
        tf_lattice(-1, qset2)


def test_synthesize_errors(mask2):
    seed = builtin_zcz("example2")
    wfs = zc_waveforms(mask2, [3, 5, 7, 9])
    with pytest.raises(SynthesisError):
        synthesize(seed, wfs[:3])
    other = masked_waveform(zadoff_chu(64, 3), SpectrumMask.full(64))
    with pytest.raises(SynthesisError):
        synthesize(seed, wfs[:3] + [other])
    with pytest.raises(SynthesisError):
        synthesize(ZCZSeedSet(seed.sequences, zone=3), wfs)


def test_example1_seed_with_masked_zc(rng):
    seed = builtin_zcz("example1")
    mask = SpectrumMask.from_runs([(1, 4), (0, 2), (1, 3), (0, 4), (1, 3)])
    q = synthesize(seed, [random_waveform(mask, rng) for _ in range(2)])
    assert q.params == (2, 256, 32)
    assert verify_theorem1(q).passed
    assert np.abs(dft(q.sequences[0][:16])[mask.holes]).max() <= 1e-12
