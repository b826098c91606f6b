"""Independent reference implementations used by the tests."""
import numpy as np

DENSE = 1_000_000


def dense_envelope(g, w0, W, samples=DENSE):
    """Min over one period of each element's AC sum on a uniform grid, via FFT."""
    m = np.arange(g.M)[:, None]
    n = np.arange(1, W.size + 1)[None, :]
    coef = W * np.sin(n * np.pi * (m + g.M_l) / (g.M - 1 + g.M_l + g.M_r))
    spectrum = np.zeros((g.M, samples), dtype=complex)
    spectrum[:, 1:W.size + 1] = coef
    values = np.fft.ifft(spectrum, axis=1).imag * samples
    return w0 + values.min(axis=1)


def single_mode_sweep_sh(pmap, M, delta, theta, N=None, M_l=2, M_r=2, w0=-9.5, amps=None):
    """Brute-force mode search: excite each sample-and-hold mode alone with
    amplitudes up to the range limit and return the mode giving the largest
    realised power towards ``theta``."""
    N = N or M
    amps = np.linspace(0.1, 5.5, 55) if amps is None else amps
    m = np.arange(M)
    h = np.exp(-1j * m * 2 * np.pi * delta * np.sin(theta))
    best, arg = -1.0, 0
    for n in range(1, N + 1):
        shape = np.sin(n * np.pi * (m + M_l) / (M - 1 + M_l + M_r))
        v = np.clip(w0 + np.outer(amps, shape), -15.0, -4.0)
        p = np.abs(pmap.coefficient(v) @ h).max()
        if p > best:
            best, arg = p, n
    return arg
