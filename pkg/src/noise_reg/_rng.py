"""Counter-based Gaussian streams (Philox4x32-10 + Wichura AS241 inverse CDF).

A stream is addressed by ``(master_seed, mode_index, path_index)``. The master
seed is the 64-bit Philox key; the mode and path indices occupy counter words
3 and 2, and the draw index occupies counter words 0-1. Philox is a bijection
of the counter for a fixed key, so distinct (mode, path, draw) triples never
share a block.

Draw ``k`` of a stream uses block ``k // 2``; the block's four 32-bit words
form two 53-bit uniforms in (0, 1), and ``k % 2`` selects one of them. Each
uniform is mapped through the inverse normal CDF, one uniform per normal,
with no rejection, so the k-th normal is a pure function of its address.
"""

import numpy as np
from numba import njit

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S5 = np.uint64(5)
_S6 = np.uint64(6)


@njit(cache=True, nogil=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Philox4x32-10 block function on uint64-held 32-bit words."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _S32
        lo0 = p0 & _MASK32
        hi1 = p1 >> _S32
        lo1 = p1 & _MASK32
        c0, c1, c2, c3 = (hi1 ^ c1 ^ k0) & _MASK32, lo1, (hi0 ^ c3 ^ k1) & _MASK32, lo0
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


_A = np.array([3.3871328727963666080e0, 1.3314166789178437745e+2,
               1.9715909503065514427e+3, 1.3731693765509461125e+4,
               4.5921953931549871457e+4, 6.7265770927008700853e+4,
               3.3430575583588128105e+4, 2.5090809287301226727e+3])
_B = np.array([1.0, 4.2313330701600911252e+1, 6.8718700749205790830e+2,
               5.3941960214247511077e+3, 2.1213794301586595867e+4,
               3.9307895800092710610e+4, 2.8729085735721942674e+4,
               5.2264952788528545610e+3])
_C = np.array([1.42343711074968357734e0, 4.63033784615654529590e0,
               5.76949722146069140550e0, 3.64784832476320460504e0,
               1.27045825245236838258e0, 2.41780725177450611770e-1,
               2.27238449892691845833e-2, 7.74545014278341407640e-4])
_D = np.array([1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
               6.89767334985100004550e-1, 1.48103976427480074590e-1,
               1.51986665636164571966e-2, 5.47593808499534494600e-4,
               1.05075007164441684324e-9])
_E = np.array([6.65790464350110377720e0, 5.46378491116411436990e0,
               1.78482653991729133580e0, 2.96560571828504891230e-1,
               2.65321895265761230930e-2, 1.24266094738807843860e-3,
               2.71155556874348757815e-5, 2.01033439929228813265e-7])
_F = np.array([1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
               1.48753612908506148525e-2, 7.86869131145613259100e-4,
               1.84631831751005468180e-5, 1.42151175831644588870e-7,
               2.04426310338993978564e-15])


@njit(cache=True, nogil=True)
def _horner(coef, x):
    acc = 0.0
    for i in range(coef.shape[0] - 1, -1, -1):
        acc = acc * x + coef[i]
    return acc


@njit(cache=True, nogil=True)
def ndtri(p):
    """Inverse standard normal CDF (AS241 PPND16), p in (0, 1)."""
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _horner(_A, r) / _horner(_B, r)
    r = p if q < 0.0 else 1.0 - p
    r = np.sqrt(-np.log(r))
    if r <= 5.0:
        r -= 1.6
        val = _horner(_C, r) / _horner(_D, r)
    else:
        r -= 5.0
        val = _horner(_E, r) / _horner(_F, r)
    return -val if q < 0.0 else val


@njit(cache=True, nogil=True)
def _uniform53(hi, lo):
    # top 27 + 26 bits; forcing the numerator odd keeps it exact and in (0, 1)
    k = ((hi >> _S5) << np.uint64(26)) | (lo >> _S6) | np.uint64(1)
    return float(k) * (1.0 / 9007199254740992.0)


@njit(cache=True, nogil=True)
def normal_pair(block, path, mode, k0, k1):
    """Two standard normals from one Philox block."""
    b = np.uint64(block)
    x0, x1, x2, x3 = philox4x32(b & _MASK32, b >> _S32, np.uint64(path), np.uint64(mode), k0, k1)
    return ndtri(_uniform53(x0, x1)), ndtri(_uniform53(x2, x3))


@njit(cache=True, nogil=True)
def fill_normals(out, start, path, mode, k0, k1):
    """Write draws ``start .. start+len(out)-1`` of one stream into ``out``."""
    n = out.shape[0]
    i = 0
    k = start
    while i < n:
        za, zb = normal_pair(k // 2, path, mode, k0, k1)
        if k % 2 == 0:
            out[i] = za
            i += 1
            k += 1
            if i < n:
                out[i] = zb
                i += 1
                k += 1
        else:
            out[i] = zb
            i += 1
            k += 1
    return out


def split_seed(master_seed):
    """64-bit master seed -> the two 32-bit Philox key words."""
    s = int(master_seed)
    return np.uint64(s & 0xFFFFFFFF), np.uint64((s >> 32) & 0xFFFFFFFF)
