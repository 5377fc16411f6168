"""Independent oracles used by the test suite.

These deliberately avoid the code paths they check: the eigensolver oracle
uses characteristic-polynomial roots (n <= 3) and deflated power iteration
(larger n) instead of Jacobi rotations, and the gradient oracle uses central
finite differences instead of backpropagation.
"""

import numpy as np

from fsoqos import mlp


# --- brute-force symmetric eigensolver -------------------------------------

def _charpoly_eigenvalues(s: np.ndarray) -> np.ndarray:
    """Roots of the characteristic polynomial, descending. n <= 3 only."""
    n = s.shape[0]
    if n == 1:
        return np.array([s[0, 0]])
    if n == 2:
        tr = s[0, 0] + s[1, 1]
        det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
        coeffs = [1.0, -tr, det]
    elif n == 3:
        tr = float(np.trace(s))
        minors = 0.0
        for i in range(3):
            for j in range(i + 1, 3):
                minors += s[i, i] * s[j, j] - s[i, j] * s[j, i]
        det = (
            s[0, 0] * (s[1, 1] * s[2, 2] - s[1, 2] * s[2, 1])
            - s[0, 1] * (s[1, 0] * s[2, 2] - s[1, 2] * s[2, 0])
            + s[0, 2] * (s[1, 0] * s[2, 1] - s[1, 1] * s[2, 0])
        )
        coeffs = [1.0, -tr, minors, -det]
    else:
        raise ValueError("characteristic-polynomial route handles n <= 3 only")
    roots = np.roots(coeffs)
    return np.sort(roots.real)[::-1]


def _nullspace_vector(m: np.ndarray) -> np.ndarray:
    """Unit kernel vector of a (numerically) singular 2x2 or 3x3 matrix."""
    n = m.shape[0]
    if n == 2:
        candidates = [np.array([m[0, 1], -m[0, 0]]), np.array([m[1, 1], -m[1, 0]])]
    else:
        candidates = [
            np.cross(m[i], m[j]) for i in range(3) for j in range(i + 1, 3)
        ]
    best = max(candidates, key=lambda v: float(np.linalg.norm(v)))
    return best / np.linalg.norm(best)


def _top_eigenpair(b: np.ndarray, basis):
    """Dominant eigenpair of a PSD matrix, orthogonal to the deflated basis.

    Power iteration accelerated by operator squaring (p -> p @ p doubles the
    effective iteration count), then polished with plain iterations.
    """
    n = b.shape[0]
    p = b / np.abs(b).max()
    for _ in range(60):
        p = p @ p
        peak = np.abs(p).max()
        if not np.isfinite(peak) or peak == 0:
            break
        p = p / peak
    x = p[:, int(np.argmax(np.sum(p * p, axis=0)))]
    for v in basis:
        x = x - (x @ v) * v
    norm = np.linalg.norm(x)
    if norm == 0:
        x = np.eye(n)[0]
        for v in basis:
            x = x - (x @ v) * v
        norm = np.linalg.norm(x)
    x = x / norm
    for _ in range(200):
        y = b @ x
        for v in basis:
            y = y - (y @ v) * v
        norm = np.linalg.norm(y)
        if norm == 0:
            break
        y = y / norm
        done = np.max(np.abs(y - x)) < 1e-15
        x = y
        if done:
            break
    return float(x @ (b @ x)), x


def brute_force_eigh(s: np.ndarray):
    """Eigenvalues (descending) and unit eigenvectors of a symmetric matrix.

    Signs follow the same convention as the production solver: the largest
    magnitude entry of each eigenvector is positive.
    """
    s = np.asarray(s, dtype=float)
    n = s.shape[0]
    if n <= 3:
        values = _charpoly_eigenvalues(s)
        vectors = []
        for lam in values:
            if n == 1:
                vectors.append(np.array([1.0]))
            else:
                vectors.append(_nullspace_vector(s - lam * np.eye(n)))
        vectors = np.column_stack(vectors)
    else:
        shift = float(np.sqrt(np.sum(s * s))) + 1.0
        b = s + shift * np.eye(n)
        vals, vecs = [], []
        for _ in range(n):
            rho, x = _top_eigenpair(b, vecs)
            vals.append(rho - shift)
            vecs.append(x)
            b = b - rho * np.outer(x, x)
        order = np.argsort(vals)[::-1]
        values = np.array(vals)[order]
        vectors = np.column_stack([vecs[i] for i in order])
    for col in range(vectors.shape[1]):
        anchor = int(np.argmax(np.abs(vectors[:, col])))
        if vectors[anchor, col] < 0:
            vectors[:, col] = -vectors[:, col]
    return values, vectors


def random_symmetric(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2.0


# --- finite-difference gradients --------------------------------------------

FD_STEP = 1e-6


def finite_difference_gradients(net, inputs, targets):
    """Central-difference gradient of mlp.loss over every parameter."""
    arrays = {
        "weights_input_hidden": net.weights_input_hidden,
        "bias_hidden": net.bias_hidden,
        "weights_hidden_output": net.weights_hidden_output,
        "bias_output": net.bias_output,
    }
    out = {}
    for name, arr in arrays.items():
        grad = np.zeros_like(arr)
        flat = arr.ravel()
        for idx in range(flat.size):
            original = flat[idx]
            flat[idx] = original + FD_STEP
            up = mlp.loss(net, inputs, targets)
            flat[idx] = original - FD_STEP
            down = mlp.loss(net, inputs, targets)
            flat[idx] = original
            grad.ravel()[idx] = (up - down) / (2.0 * FD_STEP)
        out[name] = grad
    return out


def max_relative_gradient_error(net, inputs, targets) -> float:
    """Worst-case relative disagreement between backprop and differences."""
    analytic = mlp.gradients(net, inputs, targets)
    numeric = finite_difference_gradients(net, inputs, targets)
    worst = 0.0
    for name, fd in numeric.items():
        an = getattr(analytic, name)
        denom = np.maximum(np.maximum(np.abs(an), np.abs(fd)), 1e-6)
        worst = max(worst, float(np.max(np.abs(an - fd) / denom)))
    return worst
