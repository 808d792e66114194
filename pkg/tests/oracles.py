"""Independent reference solutions on the unit square built from five-point stencils."""
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


def laplacian_5pt(n):
    """Negative Laplacian on the (n-1)^2 interior nodes of an n x n grid of [0,1]^2."""
    h = 1.0 / n
    k = n - 1
    main = 2 * np.ones(k)
    off = -np.ones(k - 1)
    T = sp.diags([off, main, off], [-1, 0, 1])
    eye = sp.identity(k)
    return (sp.kron(eye, T) + sp.kron(T, eye)).tocsc() / h ** 2


def poisson_fd(n, coeff=2.0, rhs=1.0):
    """Solve -coeff * Laplace(u) = rhs with u = 0 on the boundary; returns the full (n+1)^2 grid, row = y."""
    A = coeff * laplacian_5pt(n)
    inner = spla.spsolve(A, np.full(A.shape[0], rhs))
    u = np.zeros((n + 1, n + 1))
    u[1:-1, 1:-1] = inner.reshape(n - 1, n - 1)
    return u


def dirichlet_eigenvalue_fd(n, coeff=1.0):
    """Smallest eigenvalue of -coeff * Laplace on the unit square."""
    vals = spla.eigsh(coeff * laplacian_5pt(n), k=1, sigma=0.0, which="LM", return_eigenvectors=False)
    return float(vals[0])
