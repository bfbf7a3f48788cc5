"""Pure-Python coordinate descent sweeps; same contract as the compiled kernel."""


def cd_sweeps(X, r, beta, col_sq, active, lam, tol, max_sweeps):
    sweep = 0
    max_change = 0.0
    cols = [(int(j), X[:, j], float(col_sq[j])) for j in active if col_sq[j] != 0.0]
    while sweep < max_sweeps:
        sweep += 1
        max_change = 0.0
        for j, xj, cj in cols:
            old = beta[j]
            rho = float(xj @ r) + cj * old
            if abs(rho) <= lam:
                new = 0.0
            elif rho > 0:
                new = (rho - lam) / cj
            else:
                new = (rho + lam) / cj
            if new != old:
                d = old - new
                r += d * xj
                beta[j] = new
                if abs(d) > max_change:
                    max_change = abs(d)
        if max_change <= tol:
            break
    return sweep, max_change
