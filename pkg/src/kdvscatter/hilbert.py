"""Hilbert transform on a uniform grid via its Fourier multiplier.

Sign convention (principal value form):

    H(v)(k) = -(1/pi) p.v. int v(k') / (k' - k) dk'

whose Fourier symbol is -i*sign(xi); H is an isometry on L^2 and
H(H(v)) = -v on zero-mean data.  Reference pair:  H[1/(1+k^2)] = k/(1+k^2).

The discrete implementation periodizes the samples, so inputs must decay
at the grid edges; the grid should be at least ~4x wider than the support
of significant |v| values to control wrap-around.  For inputs with slow
algebraic tails, subtract a multiple of log_bump (whose transform is known
in closed form) first; see log_bump_hilbert.
"""

from __future__ import annotations

import numpy as np

from .grids import DECAY_THRESHOLD, check_boundary_decay

#: Minimum zero-padding factor for the periodized multiplier.
PAD_FACTOR = 4


def hilbert_transform(v, pad_factor=PAD_FACTOR, decay_threshold=DECAY_THRESHOLD):
    """Discrete Hilbert transform of uniform samples v.

    Applies the multiplier -i*sign(xi) in the dual variable on a
    zero-padded periodized grid (the xi = 0 mode is multiplied by 0).
    Real input gives real output.
    """
    v = np.asarray(v)
    check_boundary_decay(v, decay_threshold, label="hilbert_transform input")
    n = v.size
    n_fft = 1 << int(np.ceil(np.log2(max(pad_factor, 1) * n)))
    buf = np.zeros(n_fft, dtype=complex)
    lead = (n_fft - n) // 2
    buf[lead:lead + n] = v
    xi = np.fft.fftfreq(n_fft)
    out = np.fft.ifft(-1j * np.sign(xi) * np.fft.fft(buf))[lead:lead + n]
    if np.isrealobj(v):
        return out.real
    return out


def log_bump(k, b):
    """m_b(k) = log((k^2 + 1) / (k^2 + b^2)) for 0 < b <= 1: a smooth even
    bump with algebraic tail (1 - b^2)/k^2 and integral 2*pi*(1 - b)."""
    k = np.asarray(k, dtype=float)
    return np.log((k**2 + 1.0) / (k**2 + b**2))


def log_bump_hilbert(k, b):
    """Closed-form Hilbert transform of log_bump:

        H(m_b)(k) = 2 * (atan2(1, k) - atan2(b, k))

    (boundary value of the analytic extension 2 log((z+i)/(z+ib)) in the
    upper half plane; odd in k, decays like 2(1-b)/k).
    """
    k = np.asarray(k, dtype=float)
    return 2.0 * (np.arctan2(1.0, k) - np.arctan2(b, k))
