"""Self-contained oracle suites: finite-difference gradient checks, the
brute-force DTW path enumeration, the per-window least-squares smoothing
reference, and the gradient-reversal sign contract.

These run independently of the implementations they verify and back the
`check` CLI subcommand.
"""

import numpy as np

from .augment import AugmentParams, pro_aug
from .metrics import dtw_align
from .nn.layers import grl_backward, grl_forward
from .nn.losses import cosine_similarity, cross_entropy, loss_prosody, loss_triplet
from .prosody import savgol_smooth

FD_STEP = 1e-5
GRAD_TOL = 1e-5
SAVGOL_TOL = 1e-9
# entries where both gradients are below this are compared absolutely
ZERO_FLOOR = 1e-6


def finite_difference_gradient(fn, x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central finite differences of a scalar function, one element at a time."""
    grad = np.zeros_like(x, dtype=np.float64)
    flat = grad.ravel()
    x_flat = x.ravel()
    for idx in range(x_flat.size):
        original = x_flat[idx]
        x_flat[idx] = original + step
        hi = fn()
        x_flat[idx] = original - step
        lo = fn()
        x_flat[idx] = original
        flat[idx] = (hi - lo) / (2 * step)
    return grad


def relative_gradient_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Max elementwise relative error; near-zero pairs compare as matching."""
    analytic = np.asarray(analytic, dtype=np.float64).ravel()
    numeric = np.asarray(numeric, dtype=np.float64).ravel()
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    err = np.abs(analytic - numeric)
    rel = np.where(scale < ZERO_FLOOR, 0.0, err / np.maximum(scale, ZERO_FLOOR))
    return float(rel.max()) if rel.size else 0.0


def _check_result(name: str, max_err: float, tolerance: float) -> dict:
    return {
        "check": name,
        "max_err": max_err,
        "tolerance": tolerance,
        "pass": bool(max_err < tolerance),
    }


def check_loss_prosody_gradients(n_trials: int = 100, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_trials):
        n = int(rng.integers(3, 9))
        u = int(rng.integers(2, 7))
        f0_hat = rng.normal(5.0, 1.0, n)
        f0 = rng.normal(5.0, 1.0, n)
        energy_hat = rng.normal(0.0, 1.0, n)
        energy = rng.normal(0.0, 1.0, n)
        vuv = rng.integers(0, 2, n)
        if vuv.sum() == 0:
            vuv[int(rng.integers(n))] = 1
        # keep |dur_hat - dur| away from the L1 kink where the fd stencil is invalid
        dur = rng.uniform(1.0, 6.0, u)
        dur_hat = dur + rng.choice([-1.0, 1.0], u) * rng.uniform(0.05, 1.0, u)

        analytic = loss_prosody(f0_hat, f0, energy_hat, energy, dur_hat, dur, vuv)
        for name, pred in (("f0", f0_hat), ("energy", energy_hat), ("duration", dur_hat)):
            numeric = finite_difference_gradient(
                lambda: loss_prosody(f0_hat, f0, energy_hat, energy, dur_hat, dur, vuv).value,
                pred,
            )
            worst = max(worst, relative_gradient_error(analytic.gradients[name], numeric))
    return _check_result("loss_prosody_grad", worst, GRAD_TOL)


def check_loss_triplet_gradients(n_trials: int = 100, seed: int = 1) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    trials = 0
    while trials < n_trials:
        n = int(rng.integers(1, 5))
        d = int(rng.integers(2, 6))
        anchors = rng.normal(0.0, 1.0, (n, d))
        positives = rng.normal(0.0, 1.0, (n, d))
        negatives = rng.normal(0.0, 1.0, (n, d))
        loss = loss_triplet(anchors, positives, negatives)
        # skip instances with a hinge near its kink; fd is invalid there
        sims_ok = True
        for i in range(n):
            hinge = (cosine_similarity(anchors[i], negatives[i])
                     - cosine_similarity(anchors[i], positives[i]) + 0.3)
            if abs(hinge) < 1e-3:
                sims_ok = False
        if not sims_ok:
            continue
        trials += 1
        for name, mat in (("anchors", anchors), ("positives", positives), ("negatives", negatives)):
            numeric = finite_difference_gradient(
                lambda: loss_triplet(anchors, positives, negatives).value, mat
            )
            worst = max(worst, relative_gradient_error(loss.gradients[name], numeric))
    return _check_result("loss_triplet_grad", worst, GRAD_TOL)


def check_cross_entropy_gradients(n_trials: int = 100, seed: int = 2) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_trials):
        n = int(rng.integers(1, 6))
        c = int(rng.integers(2, 7))
        logits = rng.normal(0.0, 1.5, (n, c))
        labels = rng.integers(0, c, n)
        analytic = cross_entropy(logits, labels)
        numeric = finite_difference_gradient(
            lambda: cross_entropy(logits, labels).value, logits
        )
        worst = max(worst, relative_gradient_error(analytic.gradients["logits"], numeric))
    return _check_result("cross_entropy_grad", worst, GRAD_TOL)


def check_grl_contract(n_trials: int = 50, seed: int = 3) -> dict:
    """End-to-end gradient of g(grl(f(x))) must equal -lambda * grad(g(f(x))).

    f and g are random quadratic polynomial maps with analytic Jacobians;
    lambda is drawn from powers of two so the scaled path is bitwise exact.
    """
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(n_trials):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(2, 6))
        a = rng.normal(0.0, 1.0, (m, n))
        b = rng.normal(0.0, 1.0, (m, n))
        u = rng.normal(0.0, 1.0, m)
        v = rng.normal(0.0, 1.0, m)
        x = rng.normal(0.0, 1.0, n)
        lam = float(2.0 ** rng.integers(-2, 3))

        y = a @ x + b @ (x * x)                # f(x), components sum a_ji x_i + b_ji x_i^2
        jac = a + 2.0 * b * x[None, :]         # df_j/dx_i
        grad_g = u + 2.0 * v * grl_forward(y)  # dg/dy_j for g(y) = sum u_j y_j + v_j y_j^2

        end_to_end = jac.T @ grl_backward(grad_g, lam)
        reference = -lam * (jac.T @ grad_g)
        if not np.array_equal(end_to_end, reference):
            mismatches += 1
    return _check_result("grl_contract", float(mismatches), 1.0)


def savgol_reference(values: np.ndarray, window: int, order: int) -> np.ndarray:
    """Brute-force per-window least-squares fit, replicating the edge policy:
    interior positions fit their centered window; the first and last half
    windows evaluate a fit over the first/last full window; contours shorter
    than the window get one global fit."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    out = np.empty(n)
    if n < window:
        deg = min(order, n - 1)
        t = np.arange(n, dtype=np.float64)
        return np.polyval(np.polyfit(t, values, deg), t)
    half = window // 2
    for i in range(n):
        if i < half:
            lo = 0
        elif i > n - 1 - half:
            lo = n - window
        else:
            lo = i - half
        # window-centered coordinates keep the Vandermonde well conditioned
        t = np.arange(window, dtype=np.float64) - half
        coef = np.polyfit(t, values[lo : lo + window], order)
        out[i] = np.polyval(coef, float(i - lo - half))
    return out


def check_savgol_polynomials(seed: int = 4) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for window, order in ((5, 2), (7, 2), (9, 2), (9, 3), (11, 4)):
        for _ in range(10):
            n = int(rng.integers(window, 60))
            t = np.linspace(-1.0, 1.0, n)
            coef = rng.normal(0.0, 2.0, order + 1)
            poly = np.polyval(coef, t)
            worst = max(worst, float(np.abs(savgol_smooth(poly, window, order) - poly).max()))
    return _check_result("savgol_polynomial_exactness", worst, SAVGOL_TOL)


def check_savgol_oracle(n_trials: int = 100, seed: int = 5) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_trials):
        n = int(rng.integers(12, 80))
        window = int(rng.choice([5, 7, 9]))
        order = int(rng.integers(1, min(window - 1, 4) + 1))
        t = np.arange(n)
        noisy = np.sin(t / 7.0) + rng.normal(0.0, 0.3, n)
        got = savgol_smooth(noisy, window, order)
        want = savgol_reference(noisy, window, order)
        worst = max(worst, float(np.abs(got - want).max()))
    return _check_result("savgol_least_squares_oracle", worst, SAVGOL_TOL)


def brute_force_dtw_cost(a, b) -> float:
    """Exhaustive minimum over all monotone step-(1,0)/(0,1)/(1,1) paths."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)

    def best(i, j):
        cost = abs(a[i] - b[j])
        if i == 0 and j == 0:
            return cost
        options = []
        if i > 0 and j > 0:
            options.append(best(i - 1, j - 1))
        if i > 0:
            options.append(best(i - 1, j))
        if j > 0:
            options.append(best(i, j - 1))
        return cost + min(options)

    return best(a.size - 1, b.size - 1)


def check_dtw_oracle(n_pairs: int = 1000, seed: int = 6) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 7))
        a = rng.integers(0, 4, n).astype(np.float64)
        b = rng.integers(0, 4, m).astype(np.float64)
        worst = max(worst, abs(dtw_align(a, b).cost - brute_force_dtw_cost(a, b)))
    return _check_result("dtw_brute_force_oracle", worst, 1e-12)


def check_augmentation_invariants(n_draws: int = 1000, seed_base: int = 1000) -> dict:
    """Seeded augmentation draws: length and envelope preservation, operator
    balance, and per-seed reproducibility."""
    rng = np.random.default_rng(99)
    shift_count = 0
    failures = 0.0
    for k in range(n_draws):
        n = int(rng.integers(5, 200))
        f0 = rng.uniform(80.0, 300.0, n)
        energy = rng.uniform(-5.0, 2.0, n)
        params = AugmentParams(seed=seed_base + k)
        f0_a, energy_a = pro_aug(f0, energy, params)
        f0_b, energy_b = pro_aug(f0, energy, params)
        if not (np.array_equal(f0_a, f0_b) and np.array_equal(energy_a, energy_b)):
            failures += 1
        if f0_a.size != n or energy_a.size != n:
            failures += 1
        if f0_a.min() < f0.min() - 1e-12 or f0_a.max() > f0.max() + 1e-12:
            failures += 1
        if np.random.default_rng(seed_base + k).integers(2) == 0:
            shift_count += 1
    frequency = shift_count / n_draws
    if not 0.48 <= frequency <= 0.52:
        failures += 1
    return _check_result("augmentation_invariants", failures, 1.0)


GRAD_CHECKS = (
    check_loss_prosody_gradients,
    check_loss_triplet_gradients,
    check_cross_entropy_gradients,
    check_grl_contract,
)
ORACLE_CHECKS = (
    check_savgol_polynomials,
    check_savgol_oracle,
    check_dtw_oracle,
    check_augmentation_invariants,
)


def run_checks(grads: bool = True, oracles: bool = True) -> list:
    suites = []
    if grads:
        suites.extend(GRAD_CHECKS)
    if oracles:
        suites.extend(ORACLE_CHECKS)
    return [check() for check in suites]
