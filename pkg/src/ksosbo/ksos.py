"""Acquisition optimization by a kernelized sum-of-squares relaxation.

Given samples x_1..x_N with values a_i and kernel matrix K, the sampled
program seeks the largest constant c such that a - c matches a
sum-of-squares function h(x) = kappa(x)^T C kappa(x) at the samples, where
kappa(x) = (k(x_1, x), ..., k(x_N, x)) and C is PSD, minus a trace penalty
on the operator induced by C in the reproducing space:

    maximize   c - lambda_reg * Tr(C K)
    subject to a_i - c = (K C K)_ii,   C PSD.

Lagrangian duality gives

    minimize   a^T mu
    subject to K Diag(mu) K + lambda_reg * K  PSD,   sum(mu) = 1,

whose multipliers mu weight the sampled candidates into a continuous
minimizer estimate x* = sum_i mu_i x_i, projected back on the box. Any
point mass e_i is dual feasible, so every dual-feasible iterate certifies
a^T mu >= optimum while the optimum itself never exceeds min_i a_i.

With the eigendecomposition K = Q W Q^T and Y = Q sqrt(W), the dual slack
is congruent to

    S(mu) = Y^T Diag(mu) Y + lambda_reg * I,

where W is floored at a small fraction of its largest eigenvalue: the
weakest eigendirections carry dual constraints mu-quadratic-form >=
-lambda_reg / w_i that keep the dual bounded on numerically degenerate
kernels, so they are regularized (a kernel jitter) instead of dropped.
Point masses e_i remain feasible, so the certificate inequality holds
regardless. The solver follows the central path of the log-det barrier
on S(mu) with damped Newton steps; the duality gap of a centered iterate
is n / t.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, solve_triangular

from .errors import ConfigurationError, InputError
from .kernels import KernelSpec, cross_kernel, kernel_matrix
from .sampling import BoxDomain, scale_to_box, sobol_points

_KERNEL_KINDS = ("gaussian", "laplace")
_EIG_FLOOR_REL = 1e-10
_H_RIDGES = (1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0)
_T_GROWTH = 10.0
_POLISH_ITERS = 40
_MAX_BACKTRACKS = 60
_ARMIJO = 0.25
_TINY = 1e-300


@dataclass(frozen=True)
class KSOSConfig:
    """Solver and bandwidth settings for the SOS acquisition optimizer.

    lambda_reg None means scale-relative automatic: 1e-8 * (1 + max|values|)
    chosen per instance. The bandwidth follows sigma = lambda_scale * r /
    n^(1/d) with r = radius_factor * mean per-dimension range.
    """

    kernel_kind: str = "gaussian"
    lambda_scale: float = 2.0
    radius_factor: float = 0.5
    lambda_reg: float | None = None
    solver_tol: float = 1e-5
    max_newton_iters: int = 400

    def __post_init__(self):
        if self.kernel_kind not in _KERNEL_KINDS:
            raise ConfigurationError(
                f"kernel_kind must be one of {_KERNEL_KINDS}, got {self.kernel_kind!r}"
            )
        if not self.lambda_scale > 0:
            raise ConfigurationError("lambda_scale must be > 0")
        if not self.radius_factor > 0:
            raise ConfigurationError("radius_factor must be > 0")
        if self.lambda_reg is not None and self.lambda_reg < 0:
            raise ConfigurationError("lambda_reg must be >= 0")
        if not self.solver_tol > 0:
            raise ConfigurationError("solver_tol must be > 0")
        if self.max_newton_iters < 1:
            raise ConfigurationError("max_newton_iters must be >= 1")


@dataclass(frozen=True)
class KSOSSolution:
    """Solver output: certified bound, recovery weights, recovered point."""

    c_star: float
    mu: np.ndarray
    x_star: np.ndarray
    residual_norm: float
    newton_iters: int
    status: str  # converged | max_iters | infeasible_numerics
    samples: np.ndarray | None = None
    sample_values: np.ndarray | None = None
    quad_matrix: np.ndarray | None = field(default=None, repr=False)
    model_constant: float | None = None


def smoothing_sigma(radius: float, n: int, d: int, lambda_scale: float) -> float:
    """Bandwidth rule sigma = lambda_scale * radius / n^(1/d)."""
    if not radius > 0:
        raise InputError("radius must be > 0")
    if n < 1 or d < 1:
        raise InputError("n and d must be >= 1")
    return lambda_scale * radius / n ** (1.0 / d)


class _SolverBreakdown(Exception):
    pass


def _barrier_path(a_s, Y, lam_s, tol, max_iters):
    """Central-path solve of min a_s.mu st S(mu) PSD, sum(mu) = 1.

    Minimizes t * a_s.mu - logdet S(mu) for growing t with damped Newton
    steps. The KKT system for the hyperplane sum(mu) = 1 is solved through
    a Jacobi-equilibrated Cholesky of the Hessian (G o G, G the slack-inverse
    Gram), escalating a diagonal ridge whenever factorization fails or the
    computed decrement is not positive; a decrement that no ridge can make
    positive is a stall, never convergence.

    Termination is contract-driven rather than gap-driven. A stage is a
    centering run at fixed t: while the dual objective is still far from
    min(a_s) the stage stops in the quadratic zone (decrement^2 <= 0.25) and
    t grows; once the objective is within 0.95 * tol of min(a_s) the stage
    polishes to full centering. After every stage the model constant is read
    off as c = mean(a_s - diag(G)/t) (the hyperplane multiplier -nu/t at an
    exact center, with uniform solve error absorbed) and the path ends when
    the worst constraint residual against c is at most 0.5 * tol. Measuring
    residuals against c rather than a_s.mu keeps the duality gap r/t out of
    them, so convergence happens at moderate t where the Newton algebra is
    still well conditioned in doubles.

    Returns (mu, L, G, t, iters, status, c_model); L, G belong to the
    returned iterate and c_model is the model constant in solver units.
    Raises _SolverBreakdown on non-finite values, so the caller can
    substitute the point-mass certificate.
    """
    n = a_s.shape[0]
    r = Y.shape[1]
    ones = np.ones(n)
    eye_r = np.eye(r)
    a_min = float(np.min(a_s))

    def slack_chol(m):
        S = Y.T @ (m[:, None] * Y) + lam_s * eye_r
        try:
            return cholesky(S, lower=True)
        except np.linalg.LinAlgError:
            return None

    def gram(L):
        V = solve_triangular(L, Y.T, lower=True)
        G = V.T @ V
        return 0.5 * (G + G.T)

    def barrier_value(t, m, L):
        return t * float(a_s @ m) - 2.0 * float(np.sum(np.log(np.diag(L))))

    def newton_direction(g, G):
        H = G * G
        dh = np.sqrt(np.maximum(np.diag(H), _TINY))
        Hs = H / np.outer(dh, dh)
        gs = g / dh
        os_ = ones / dh
        for ridge in _H_RIDGES:
            try:
                cf = cho_factor(Hs + ridge * np.eye(n), lower=True)
            except np.linalg.LinAlgError:
                continue
            sol_1 = cho_solve(cf, os_)
            sol_g = cho_solve(cf, gs)
            denom = float(os_ @ sol_1)
            if not denom > 0:
                continue
            nu = -float(os_ @ sol_g) / denom
            dmu = -(sol_g + nu * sol_1) / dh
            dec2 = -float(g @ dmu)
            if np.isfinite(dec2) and dec2 > 0.0:
                return dmu, dec2
        return None, 0.0

    def fit_constant(G, t):
        diag_m = np.diag(G) / t
        c_model = float(np.mean(a_s - diag_m))
        resid = float(np.max(np.abs(a_s - c_model - diag_m)))
        return c_model, resid

    mu = np.full(n, 1.0 / n)
    L = slack_chol(mu)
    if L is None:
        raise _SolverBreakdown("initial slack not positive definite")
    t = float(max(r, 2))
    t_cap = 1e6 * r / tol
    total = 0
    status = None
    # best near-optimal iterate seen, by residual; polish steps reduce the
    # barrier value yet can wander in the stiff directions residuals live
    # in, so the best-centered iterate must be kept, not the last one
    best = None
    while True:
        stalled = False
        centered = False
        converged = False
        near_optimal = False
        best_dec2 = np.inf
        stagnant = 0
        polish_left = _POLISH_ITERS
        G = gram(L)
        while total < max_iters:
            if not np.all(np.isfinite(G)):
                raise _SolverBreakdown("slack inverse not finite")
            obj = float(a_s @ mu)
            near_optimal = obj <= a_min + 0.95 * tol
            if near_optimal:
                c_model, resid = fit_constant(G, t)
                if best is None or resid < best[0]:
                    best = (resid, mu.copy(), L.copy(), G.copy(), t, c_model)
                if resid <= 0.5 * tol:
                    converged = True
                    break
                if polish_left <= 0:
                    centered = True
                    break
                polish_left -= 1
            g = t * a_s - np.diag(G)
            dmu, dec2 = newton_direction(g, G)
            if dmu is None:
                # exact arithmetic has dec2 = dmu' H dmu >= 0, so a ladder
                # that cannot make it positive means the projected gradient
                # is at the roundoff floor: as centered as doubles allow
                centered = True
                break
            if dec2 <= 1e-12 * n:
                centered = True
                break
            if not near_optimal and dec2 <= 0.25:
                centered = True
                break
            if dec2 < 0.97 * best_dec2:
                best_dec2 = dec2
                stagnant = 0
            else:
                stagnant += 1
                if stagnant >= 30:
                    centered = dec2 <= 0.25
                    stalled = not centered
                    break
            f0 = barrier_value(t, mu, L)
            if not np.isfinite(f0):
                raise _SolverBreakdown("barrier value not finite")
            total += 1
            alpha = 1.0
            moved = False
            for _ in range(_MAX_BACKTRACKS):
                cand = mu + alpha * dmu
                Lc = slack_chol(cand)
                if Lc is not None:
                    fc = barrier_value(t, cand, Lc)
                    if np.isfinite(fc) and fc <= f0 - _ARMIJO * alpha * dec2:
                        # re-center the hyperplane drift from inexact solves
                        rec = cand + (1.0 - float(np.sum(cand))) / n
                        Lr = slack_chol(rec)
                        if Lr is not None:
                            mu, L = rec, Lr
                        else:
                            mu, L = cand, Lc
                        moved = True
                        break
                alpha *= 0.5
            if not moved:
                stalled = True
                break
            G = gram(L)
        if converged:
            status = "converged"
            break
        if stalled or total >= max_iters or t > t_cap:
            status = "max_iters"
            break
        if near_optimal and centered:
            # objective target met and the stage is as centered as the
            # arithmetic allows, yet residuals miss: larger t only degrades
            # the centering that residuals depend on, so give up honestly
            status = "max_iters"
            break
        t *= _T_GROWTH
    if best is not None and status != "converged":
        resid, mu, L, G, t, c_model = best
        if resid <= 0.5 * tol and float(a_s @ mu) <= a_min + 0.95 * tol:
            status = "converged"
    c_model, _ = fit_constant(G, t)
    return mu, L, G, t, total, status, c_model


def _diag_repair(a_s, Phi, Y, lam_s, mu, L, t):
    """Correct the reconstructed model's diagonal misfit by a linear solve.

    The primal candidate C = S(mu)^-1 / t leaves residuals the barrier
    centering cannot always reach in doubles. Perturbing C by
    S^-1 Y' Diag(eps) Y S^-1 shifts the model diagonal at the samples by
    exactly (M o M) eps with M = Phi S^-1 Y' (the map is linear, no
    remainder; Phi carries the true kernel spectrum so this measures the
    model against the caller's K, not the floored one), and the perturbed
    C stays PSD iff S(mu + t * eps) is PSD, checked directly. Solves
    (M o M) eps = misfit with iterative refinement, halving eps until the
    PSD check passes.

    Returns (resid, eps, c_fit): the best achieved worst-case misfit, the
    adopted perturbation (None when the unrepaired model is best), and the
    matching model constant.
    """
    n = a_s.shape[0]
    eye_r = np.eye(Y.shape[1])
    B = cho_solve((L, True), Y.T)
    S_inv = cho_solve((L, True), eye_r)
    diag0 = np.einsum("ij,jk,ik->i", Phi, S_inv / t, Phi)
    c0 = float(np.mean(a_s - diag0))
    best = (float(np.max(np.abs(a_s - c0 - diag0))), None, c0)
    M = Phi @ B
    A = M * M
    dh = np.sqrt(np.maximum(np.diag(A), _TINY))
    As = A / np.outer(dh, dh)
    cf = None
    for ridge in _H_RIDGES:
        try:
            cf = cho_factor(As + ridge * np.eye(n), lower=True)
            break
        except np.linalg.LinAlgError:
            continue
    if cf is None:
        return best
    ts = (a_s - c0 - diag0) / dh
    es = cho_solve(cf, ts)
    for _ in range(3):
        es = es + cho_solve(cf, ts - As @ es)
    eps = es / dh
    if not np.all(np.isfinite(eps)):
        return best
    for _ in range(25):
        S = Y.T @ ((mu + t * eps)[:, None] * Y) + lam_s * eye_r
        try:
            cholesky(S, lower=True)
        except np.linalg.LinAlgError:
            eps = 0.5 * eps
            continue
        diag_new = diag0 + A @ eps
        c_fit = float(np.mean(a_s - diag_new))
        resid = float(np.max(np.abs(a_s - c_fit - diag_new)))
        if np.isfinite(resid) and resid < best[0]:
            best = (resid, eps, c_fit)
        break
    return best


def _point_mass_result(a, n, imin, iters, status):
    """Dual-feasible point-mass certificate: c_star = min(values), B = 0.

    The matching primal pair is the constant model c = min(values) with a
    zero quadratic form, whose worst constraint residual is the value spread.
    """
    mu = np.zeros(n)
    mu[imin] = 1.0
    info = {
        "mu_raw": mu.copy(),
        "residual_norm": float(np.max(a) - np.min(a)),
        "newton_iters": iters,
        "status": status,
        "gap": float("inf"),
        "eig_rank": 0,
        "quad_matrix": np.zeros((n, n)),
        "model_constant": float(a[imin]),
    }
    return float(a[imin]), mu, info


def solve_ksos_sdp(
    values,
    K,
    lambda_reg: float,
    tol: float = 1e-5,
    max_iters: int = 400,
):
    """Solve the sampled SOS program; returns (c_star, mu, info).

    c_star is the dual objective a^T mu at the returned dual-feasible
    iterate, an upper bound on the program optimum that meets
    c_star <= min(values) + tol * scale with scale = 1 + max|values|.
    mu is clamped to be nonnegative and renormalized to sum to one
    (info["mu_raw"] keeps the signed multipliers). info carries
    residual_norm, newton_iters, status, gap, eig_rank, quad_matrix (the
    PSD coefficient matrix C), and model_constant, the fitted constant c
    of the model c + kappa(x)^T C kappa(x); residual_norm is the worst
    violation of values_i - c - (K C K)_ii in original units. c_star and
    model_constant differ by roughly the duality gap of the returned
    iterate: the bound certificate comes from c_star, the model fit from
    model_constant.

    Inputs are solved in value-normalized units (values / scale,
    lambda_reg / scale); results are scaled back, mu is scale-invariant.
    Breakdown (non-finite algebra, failed eigendecomposition) yields
    status "infeasible_numerics" with the point-mass certificate at the
    best sample, never a crash. A stalled or budget-bound path returns
    status "max_iters" with its best dual-feasible iterate, swapped for
    the point mass whenever that iterate's objective is worse.
    """
    a = np.asarray(values, dtype=float).ravel()
    n = a.shape[0]
    if n < 2:
        raise InputError("need at least 2 sampled values")
    if not np.all(np.isfinite(a)):
        raise InputError("values must be finite")
    K = np.asarray(K, dtype=float)
    if K.shape != (n, n):
        raise InputError(f"K must be ({n}, {n}), got {K.shape}")
    if not np.all(np.isfinite(K)):
        raise InputError("K must be finite")
    if not np.isfinite(lambda_reg) or lambda_reg < 0:
        raise InputError("lambda_reg must be finite and >= 0")
    if not tol > 0:
        raise InputError("tol must be > 0")
    if max_iters < 1:
        raise InputError("max_iters must be >= 1")
    K = 0.5 * (K + K.T)

    scale = 1.0 + float(np.max(np.abs(a)))
    a_s = a / scale
    lam_s = lambda_reg / scale
    imin = int(np.argmin(a))

    try:
        w, Q = np.linalg.eigh(K)
    except np.linalg.LinAlgError:
        return _point_mass_result(a, n, imin, 0, "infeasible_numerics")
    w_max = float(np.max(w)) if w.size else 0.0
    if not w_max > 0:
        return _point_mass_result(a, n, imin, 0, "infeasible_numerics")
    # floor rather than truncate the spectrum: dropped directions carry
    # real dual constraints (mu bounded below by -lambda/w_i), so cutting
    # them can leave the dual unbounded on degenerate kernels; the floor
    # is a kernel jitter of at most _EIG_FLOOR_REL * w_max
    w_r = np.maximum(w, _EIG_FLOOR_REL * w_max)
    Q_r = Q
    Y = Q_r * np.sqrt(w_r)
    r = n

    try:
        mu_raw, L, G, t, iters, status, c_model = _barrier_path(
            a_s, Y, lam_s, tol, max_iters
        )
    except _SolverBreakdown:
        return _point_mass_result(a, n, imin, 0, "infeasible_numerics")

    obj = float(a_s @ mu_raw)
    Phi = Q_r * (np.maximum(w, 0.0) / np.sqrt(w_r))
    _, eps_vec, _ = _diag_repair(a_s, Phi, Y, lam_s, mu_raw, L, t)
    S_inv = cho_solve((L, True), np.eye(r))
    Z = Q_r / np.sqrt(w_r)
    C_red = S_inv / t
    if eps_vec is not None:
        B_mat = cho_solve((L, True), Y.T)
        C_red = C_red + B_mat @ (eps_vec[:, None] * B_mat.T)
    # the official residual measures the returned model against the
    # caller's kernel; it decides convergence in both directions
    diag_true = np.einsum("ij,jk,ik->i", Phi, C_red, Phi)
    c_model = float(np.mean(a_s - diag_true))
    resid_s = float(np.max(np.abs(a_s - c_model - diag_true)))
    if obj <= float(a_s[imin]) + 0.95 * tol and resid_s <= 0.5 * tol:
        status = "converged"
    elif status == "converged":
        status = "max_iters"
    if status != "converged" and obj > float(a_s[imin]) + 0.95 * tol:
        # the trivial certificate outperforms the stalled iterate
        c_star, mu, info = _point_mass_result(a, n, imin, iters, status)
        return c_star, mu, info

    c_star = scale * obj
    residual = scale * resid_s
    quad = scale * (Z @ C_red @ Z.T)
    mu = np.maximum(mu_raw, 0.0)
    mu = mu / float(np.sum(mu))
    info = {
        "mu_raw": mu_raw,
        "residual_norm": residual,
        "newton_iters": iters,
        "status": status,
        "gap": scale * r / t,
        "eig_rank": int(np.sum(w > _EIG_FLOOR_REL * w_max)),
        "quad_matrix": quad,
        "model_constant": scale * c_model,
    }
    return c_star, mu, info


def ksos_minimize(
    objective,
    box: BoxDomain,
    budget: int,
    cfg: KSOSConfig,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, KSOSSolution]:
    """Minimize a black-box objective over the box through the SOS relaxation.

    Consumes exactly ``budget`` objective evaluations: the Sobol candidates
    are the only points scored here; the recovered point is returned
    unevaluated and its (expensive) evaluation is the caller's.

    Parameters
    ----------
    objective : callable
        Vectorized: maps an (m, d) array of points to m values.
    box : BoxDomain
    budget : int
        Number of candidate samples, >= 2.
    cfg : KSOSConfig
    rng : numpy Generator, optional
        Drives the Sobol digital shift; omit for the unscrambled set.

    Returns
    -------
    (x_next, solution)
        x_next is the recovered weighted candidate combination projected to
        the box, or the best sampled candidate if and only if the solver
        reported infeasible_numerics.
    """
    if budget < 2:
        raise InputError("budget must be >= 2")
    d = box.dim
    candidates = scale_to_box(sobol_points(budget, d, rng), box)
    values = np.asarray(objective(candidates), dtype=float).ravel()
    if values.shape[0] != budget:
        raise InputError("objective must return one value per candidate row")

    r = cfg.radius_factor * float(np.mean(box.range_array))
    sigma = smoothing_sigma(r, budget, d, cfg.lambda_scale)
    K = kernel_matrix(KernelSpec(cfg.kernel_kind, sigma), candidates)
    lam = cfg.lambda_reg
    if lam is None:
        lam = 1e-8 * (1.0 + float(np.max(np.abs(values))))
    c_star, mu, info = solve_ksos_sdp(
        values, K, lam, tol=cfg.solver_tol, max_iters=cfg.max_newton_iters
    )

    if info["status"] == "infeasible_numerics":
        x_next = candidates[int(np.argmin(values))].copy()
    else:
        x_next = box.clip(mu @ candidates)

    solution = KSOSSolution(
        c_star=c_star,
        mu=mu,
        x_star=x_next,
        residual_norm=info["residual_norm"],
        newton_iters=info["newton_iters"],
        status=info["status"],
        samples=candidates,
        sample_values=values,
        quad_matrix=info["quad_matrix"],
        model_constant=info["model_constant"],
    )
    return x_next, solution


def sos_model_values(solution: KSOSSolution, kernel_spec: KernelSpec, X) -> np.ndarray:
    """Evaluate the fitted SOS model c + kappa(x)^T C kappa(x) at new points.

    kappa(x) is the vector of kernel sections k(x_i, x) over the stored
    samples. Used by the 1-d visualization path.
    """
    if solution.quad_matrix is None or solution.samples is None:
        raise InputError("solution does not carry a model matrix")
    Phi = cross_kernel(kernel_spec, np.atleast_2d(np.asarray(X, dtype=float)), solution.samples)
    quad = np.einsum("ij,jk,ik->i", Phi, solution.quad_matrix, Phi)
    c = solution.c_star if solution.model_constant is None else solution.model_constant
    return c + quad
