"""Pure-numpy theta lattice sum (fallback backend)."""

import numpy as np


def theta_sum_raw(m, tau, w, order=0):
    """Sum exp(i pi m.tau m + 2 i pi m.w) over the rows of m.

    Returns (value, grad, hess); the exponent is shifted by its maximal real
    part for overflow-safe accumulation, the shift being restored at the end.
    """
    m = np.asarray(m, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    w = np.asarray(w, dtype=complex)
    mt = m @ tau
    expo = 1j * np.pi * np.einsum("ij,ij->i", mt, m) + 2j * np.pi * (m @ w)
    shift = np.max(expo.real)
    terms = np.exp(expo - shift)
    scale = np.exp(shift)
    val = terms.sum() * scale
    grad = hess = None
    if order >= 1:
        coeff = 2j * np.pi * m
        grad = (coeff * terms[:, None]).sum(axis=0) * scale
    if order >= 2:
        cm = 2j * np.pi * m
        hess = np.einsum("ij,ik,i->jk", cm, cm, terms) * scale
    return val, grad, hess
