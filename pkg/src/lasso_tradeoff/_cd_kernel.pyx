# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled cyclic coordinate descent sweeps for the Lasso."""

from scipy.linalg.cython_blas cimport daxpy, ddot


def cd_sweeps(double[::1, :] X, double[::1] r, double[::1] beta, const double[::1] col_sq,
              const long[::1] active, double lam, double tol, long max_sweeps):
    """Cyclic sweeps over ``active`` until the largest coefficient move is <= tol.

    ``r`` must hold ``y - X beta`` on entry; ``r`` and ``beta`` are updated in
    place.  Returns ``(sweeps, last_max_change)``.
    """
    cdef int n = X.shape[0]
    cdef int one = 1
    cdef Py_ssize_t i, j, na = active.shape[0]
    cdef long sweep = 0
    cdef double rho, old, new, d, step, max_change = 0.0, mag
    with nogil:
        while sweep < max_sweeps:
            sweep += 1
            max_change = 0.0
            for i in range(na):
                j = active[i]
                if col_sq[j] == 0.0:
                    continue
                old = beta[j]
                rho = ddot(&n, &X[0, j], &one, &r[0], &one) + col_sq[j] * old
                mag = rho if rho >= 0 else -rho
                if mag <= lam:
                    new = 0.0
                elif rho > 0:
                    new = (rho - lam) / col_sq[j]
                else:
                    new = (rho + lam) / col_sq[j]
                if new != old:
                    d = old - new
                    daxpy(&n, &d, &X[0, j], &one, &r[0], &one)
                    beta[j] = new
                    step = d if d >= 0 else -d
                    if step > max_change:
                        max_change = step
            if max_change <= tol:
                break
    return sweep, max_change
