"""Counter-based random streams keyed by (seed, realization, field tag, site).

Sites are grouped in fixed blocks; each block owns an independent Philox
stream, so the variate attached to a site never depends on which window was
requested. Enlarging a window extends a realization instead of reshuffling it.
"""
import numpy as np

BLOCK = 1024
_MASK64 = (1 << 64) - 1

TAG_THETA = 1
TAG_ALPHA = 2
TAG_ETA = 3


def _key(seed, realization):
    ss = np.random.SeedSequence([int(seed) & _MASK64, int(realization) & _MASK64])
    return ss.generate_state(2, dtype=np.uint64)


def site_uniforms(seed, realization, tag, lo, hi):
    """Uniform [0, 1) variates for sites lo..hi inclusive."""
    if hi < lo:
        return np.empty(0)
    key = _key(seed, realization)
    first, last = lo // BLOCK, hi // BLOCK
    chunks = []
    for b in range(first, last + 1):
        # the low word advances while the block is drawn; the block and tag
        # sit in high words so that streams of different blocks never overlap
        counter = np.array([0, 0, b & _MASK64, tag], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=key, counter=counter))
        chunks.append(gen.random(BLOCK))
    u = np.concatenate(chunks)
    start = lo - first * BLOCK
    return u[start:start + hi - lo + 1]
