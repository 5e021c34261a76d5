import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crseq.optimize import (
    OptimizerConfig,
    best_objective,
    flat_beta,
    gs_step_aux,
    gs_step_B,
    objective,
    optimize_all,
    optimize_waveform,
    pareto_sweep,
    project_capped_simplex,
    restart_rng,
    sidelobe_objective,
    solve_beta,
)
from crseq.scenario import resolve_mask
from crseq.seqcore import SpectrumMask, dft_matrix, idft, pacf, papr

from oracles import grid_minimax_beta


def random_instance(rng, n=None):
    n = n or int(rng.integers(4, 40))
    marking = (rng.random(n) < 0.7).astype(int)
    marking[int(rng.integers(n))] = 1
    mask = SpectrumMask(marking)
    beta = rng.random(n) * marking
    beta *= n / beta.sum()
    B = np.sqrt(beta) * np.exp(2j * np.pi * rng.random(n))
    return mask, beta, B


# --------------------------------------------------------------------------
# configuration


def test_config_defaults():
    cfg = OptimizerConfig()
    assert cfg.epsilon == 1e-5 and cfg.max_iter == 10_000 and cfg.beta_method == "minimax"


@pytest.mark.parametrize(
    "kw", [{"lam": -0.1}, {"lam": 1.01}, {"epsilon": 0}, {"max_iter": 0}, {"n_restarts": 0}, {"beta_method": "cvx"}]
)
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        OptimizerConfig(**kw)


def test_config_replace_validates():
    cfg = OptimizerConfig(lam=0.3)
    assert cfg.replace(lam=0.7).lam == 0.7
    with pytest.raises(ValueError):
        cfg.replace(lam=2.0)


# --------------------------------------------------------------------------
# power spectrum


def test_pacf_is_fourier_pair_of_power_spectrum(rng):
    """R_b(t) = sqrt(N) F_N(t, :) beta, constant checked against the direct PACF."""
    for n in (5, 8, 64):
        B = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        beta = np.abs(B) ** 2
        assert np.allclose(pacf(idft(B)), np.sqrt(n) * dft_matrix(n) @ beta, atol=1e-10)


def test_solve_beta_empty_holes_is_flat():
    ps = solve_beta(SpectrumMask.full(16))
    assert np.allclose(ps.beta, 1.0)
    assert ps.objective == pytest.approx(0, abs=1e-12)


def test_solve_beta_fully_blocked():
    with pytest.raises(ValueError):
        solve_beta(SpectrumMask(np.zeros(8, dtype=int)))


@pytest.mark.parametrize("method", ["minimax", "flat"])
def test_solve_beta_constraints(method, mask2):
    ps = solve_beta(mask2, method)
    assert np.all(ps.beta[mask2.holes] == 0)
    assert np.all(ps.beta >= 0)
    assert ps.beta.sum() == pytest.approx(64, abs=1e-9)
    assert ps.objective == pytest.approx(sidelobe_objective(ps.beta))


def test_flat_method_value(mask2):
    ps = solve_beta(mask2, "flat")
    assert np.allclose(ps.beta[mask2.available], 64 / 50)


def test_minimax_improves_on_flat(mask2):
    assert solve_beta(mask2).objective < solve_beta(mask2, "flat").objective


@pytest.mark.parametrize("hole", [0, 3, 5])
def test_solve_beta_within_five_percent_of_grid(hole):
    ps = solve_beta(SpectrumMask.from_holes(8, [hole]))
    assert ps.objective <= 1.05 * grid_minimax_beta(8, {hole}, 0.05)


@pytest.mark.parametrize("hole", [1, 3])
def test_solve_beta_matches_convex_solver(hole):
    cp = pytest.importorskip("cvxpy")
    N = 8
    F = dft_matrix(N)[1:]
    b = cp.Variable(N, nonneg=True)
    prob = cp.Problem(cp.Minimize(cp.max(cp.abs(F @ b))), [cp.sum(b) == N, b[hole] == 0])
    prob.solve()
    ps = solve_beta(SpectrumMask.from_holes(N, [hole]))
    assert ps.objective == pytest.approx(prob.value, rel=1e-3)


def test_solve_beta_deterministic(mask2):
    assert np.array_equal(solve_beta(mask2).beta, solve_beta(mask2).beta)


@given(
    st.lists(st.floats(-5, 5), min_size=2, max_size=20),
    st.integers(0, 2**31),
    st.floats(0.1, 50),
)
def test_projection_properties(values, seed, total):
    v = np.array(values)
    r = np.random.default_rng(seed)
    avail = r.random(v.size) < 0.6
    avail[0] = True
    x = project_capped_simplex(v, avail, total)
    assert np.all(x >= 0) and np.all(x[~avail] == 0)
    assert x.sum() == pytest.approx(total, rel=1e-9)
    # no feasible point is closer to v
    for _ in range(20):
        y = np.zeros_like(v)
        y[avail] = r.dirichlet(np.ones(avail.sum())) * total
        assert np.linalg.norm(x - v) <= np.linalg.norm(y - v) + 1e-9
    # idempotent
    assert np.allclose(project_capped_simplex(x, avail, total), x, atol=1e-12)


def test_flat_beta():
    m = SpectrumMask.from_holes(10, [0, 1])
    assert flat_beta(m).tolist() == [0, 0] + [1.25] * 8


# --------------------------------------------------------------------------
# phase updates


def test_aux_real_symmetric_B_gives_real_time_phases(rng):
    N = 16
    B = rng.standard_normal(N)
    B[1:] = (B[1:] + B[1:][::-1]) / 2  # B[k] = B[N-k]
    _, p = gs_step_aux(B.astype(complex))
    ph = np.mod(np.angle(p), np.pi)
    assert np.all(np.minimum(ph, np.pi - ph) <= 1e-9)


def test_aux_impulse_closed_form():
    N = 8
    B = np.zeros(N, complex)
    B[3] = 1.0
    P, p = gs_step_aux(B)
    # b_n = exp(2j pi 3 n / N) / sqrt(N); its zero-padded 2N-point transform has a closed form
    n = np.arange(N)
    b = np.exp(2j * np.pi * 3 * n / N) / np.sqrt(N)
    direct = np.array([sum(b[m] * np.exp(-2j * np.pi * k * m / (2 * N)) for m in range(N)) for k in range(2 * N)])
    nz = np.abs(direct) > 1e-9
    assert np.allclose(np.angle(P[nz] / direct[nz]), 0, atol=1e-9)
    assert np.allclose(np.angle(p / b), 0, atol=1e-12)


def test_aux_magnitudes(rng):
    _, _, B = random_instance(rng)
    P, p = gs_step_aux(B)
    assert np.allclose(np.abs(P), 1 / np.sqrt(2))
    assert np.allclose(np.abs(p), 1)
    assert P.size == 2 * p.size


def test_B_step_limits(rng):
    mask, beta, B = random_instance(rng, 12)
    P, p = gs_step_aux(B)
    F = dft_matrix(12)
    B0 = gs_step_B(P, p, beta, 0.0)
    av = beta > 0
    assert np.allclose(np.angle(B0[av] / (F @ p)[av]), 0, atol=1e-9)
    p_hat = (dft_matrix(24).conj().T @ P)[:12]
    B1 = gs_step_B(P, p, beta, 1.0)
    assert np.allclose(np.angle(B1[av] / (F @ p_hat)[av]), 0, atol=1e-9)


def test_B_step_keeps_magnitudes_and_holes(rng):
    for _ in range(20):
        mask, beta, B = random_instance(rng)
        P, p = gs_step_aux(B)
        Bn = gs_step_B(P, p, beta, float(rng.random()))
        assert np.all(Bn[mask.holes] == 0)
        assert np.allclose(np.abs(Bn), np.sqrt(beta))


def test_each_half_step_descends(rng):
    for _ in range(50):
        mask, beta, B = random_instance(rng)
        lam = float(rng.random())
        P0, p0 = rng.standard_normal(2 * B.size) + 0j, np.exp(1j * rng.random(B.size))
        P0 = P0 / np.abs(P0) / np.sqrt(2)
        j_start = objective(B, P0, p0, lam)
        P, p = gs_step_aux(B)
        j_aux = objective(B, P, p, lam)
        Bn = gs_step_B(P, p, beta, lam)
        j_b = objective(Bn, P, p, lam)
        assert j_aux <= j_start + 1e-10
        assert j_b <= j_aux + 1e-10
        assert best_objective(Bn, lam) <= j_b + 1e-10


# --------------------------------------------------------------------------
# full runs


def test_objective_trace_nonincreasing(mask2):
    res = optimize_waveform(mask2, OptimizerConfig(lam=0.5, max_iter=300, rng_seed=1))
    d = np.diff(res.objective_trace)
    assert np.all(d <= 1e-10)


def test_result_respects_mask(mask2):
    res = optimize_waveform(mask2, OptimizerConfig(lam=0.3, max_iter=200))
    B = res.waveform.B
    assert np.all(B[mask2.holes] == 0)
    assert np.abs(B[mask2.available]) ** 2 == pytest.approx(solve_beta(mask2).beta[mask2.available])
    assert res.papr_db == pytest.approx(papr(res.waveform.b))


def test_empty_holes_lambda0_near_unimodular():
    res = optimize_waveform(SpectrumMask.full(64), OptimizerConfig(lam=0.0, n_restarts=4, rng_seed=3))
    assert res.papr_db <= 0.2


def test_termination_rule(mask2):
    res = optimize_waveform(mask2, OptimizerConfig(lam=0.5, epsilon=1e-3, rng_seed=2))
    assert res.converged
    assert res.step_trace[-1] < 1e-3
    assert all(s >= 1e-3 for s in res.step_trace[:-1])
    assert res.iterations == len(res.step_trace)
    short = optimize_waveform(mask2, OptimizerConfig(lam=0.5, max_iter=3, rng_seed=2))
    assert not short.converged and short.iterations == 3


def test_restart_selection_and_worker_independence(mask2):
    cfg = OptimizerConfig(lam=0.5, max_iter=150, n_restarts=4, rng_seed=7)
    runs = optimize_all(mask2, cfg, workers=1)
    best = optimize_waveform(mask2, cfg, workers=4)
    assert [r.restart for r in runs] == [0, 1, 2, 3]
    assert best.objective == min(r.objective for r in runs)
    assert np.array_equal(best.waveform.B, min(runs, key=lambda r: r.objective).waveform.B)


def test_restart_streams_are_distinct():
    a = restart_rng(5, 0).random(4)
    b = restart_rng(5, 1).random(4)
    assert not np.allclose(a, b)
    assert np.array_equal(a, restart_rng(5, 0).random(4))


def test_pareto_sweep_rows():
    mask = resolve_mask("ieee80211a")
    cfg = OptimizerConfig(max_iter=200, rng_seed=0)
    rows = pareto_sweep(mask, [0.0, 0.5, 1.0], cfg)
    assert [r.config.lam for r in rows] == [0.0, 0.5, 1.0]
    assert set(rows[0].summary()) == {"lambda", "papr_db", "max_aacf", "iterations", "converged"}
    single = pareto_sweep(mask, [0.5], cfg)[0]
    direct = optimize_waveform(mask, cfg.replace(lam=0.5))
    assert np.array_equal(single.waveform.B, direct.waveform.B)
    with pytest.raises(ValueError):
        pareto_sweep(mask, [], cfg)
