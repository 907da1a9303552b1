"""Pure-Python matrix-element assembly (reference and fallback for ``_assemble``)."""
from math import sqrt

import numpy as np

FULL, EVEN, ODD = 0, 1, 2


def assemble(n, mixture, mode, J, U, omega, g, offsets):
    """Upper-triangle COO triplets of the double-well Hamiltonian.

    ``mode`` selects the full basis (0) or the even (1) / odd (2) parity
    sector.  Duplicated (row, col) pairs are allowed and must be summed by
    the caller.
    """
    rows, cols, vals = [], [], []
    sign = -1.0 if mode == ODD else 1.0
    u_n = U / n if n > 0 else 0.0
    g_n = g / sqrt(2.0 * n) if (mixture and n > 0) else 0.0
    top = n // 2 if mixture else 0

    def lowest_left(a):
        if mode == FULL:
            return 0
        if mode == EVEN:
            return (a + 1) // 2
        return a // 2 + 1

    def weight(nl, nr):
        if mode == FULL:
            return 1.0
        return 0.5 if nl == nr else 0.7071067811865476

    def emit(col, c_col, nl, nr, m, h):
        # target |nl, nr, m>, contribution h from column state
        if mode == FULL:
            row = offsets[m] + nr
            if row <= col:
                rows.append(row)
                cols.append(col)
                vals.append(h)
            return
        if nl >= nr:
            s = 1.0
        else:
            nl, nr = nr, nl
            s = sign
        if nl == nr:
            if mode == ODD:
                return
            s = 2.0
        row = offsets[m] + nr
        if row <= col:
            rows.append(row)
            cols.append(col)
            vals.append(2.0 * c_col * weight(nl, nr) * s * h)

    for m in range(top, -1, -1):
        a = n - 2 * m
        for nl in range(a, lowest_left(a) - 1, -1):
            nr = a - nl
            col = offsets[m] + nr
            c = weight(nl, nr)
            diag = u_n * (nl * (nl - 1) + nr * (nr - 1)) + omega * m
            emit(col, c, nl, nr, m, diag)
            if J != 0.0:
                if nr > 0:
                    emit(col, c, nl + 1, nr - 1, m, -J * sqrt((nl + 1) * nr))
                if nl > 0:
                    emit(col, c, nl - 1, nr + 1, m, -J * sqrt(nl * (nr + 1)))
            if g_n != 0.0:
                if nl >= 2:
                    emit(col, c, nl - 2, nr, m + 1, -g_n * sqrt((m + 1) * nl * (nl - 1)))
                if nr >= 2:
                    emit(col, c, nl, nr - 2, m + 1, -g_n * sqrt((m + 1) * nr * (nr - 1)))
                if m > 0:
                    emit(col, c, nl + 2, nr, m - 1, -g_n * sqrt(m * (nl + 1) * (nl + 2)))
                    emit(col, c, nl, nr + 2, m - 1, -g_n * sqrt(m * (nr + 1) * (nr + 2)))

    return (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64),
            np.asarray(vals, dtype=np.float64))
