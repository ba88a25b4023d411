"""Counter-based random streams.

Every random draw in the package comes from a Philox generator keyed by
``(seed, block)``. A block is a fixed slice of work (a group of Monte-Carlo
samples or a run of time steps), so the numbers a block sees do not depend
on how many workers process the blocks or in which order.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ParameterError


def block_generator(seed, block):
    """Return the generator for block ``block`` of stream ``seed``."""
    seed = int(seed)
    block = int(block)
    if seed < 0 or block < 0:
        raise ParameterError("seed and block index must be non-negative")
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def exponential_inverse_cdf(uniforms, mean):
    """Map uniforms on [0, 1) to exponential variates by inverting the CDF."""
    return -np.log1p(-uniforms) * mean


def map_blocks(func, num_blocks, workers=1):
    """Evaluate ``func(b)`` for ``b = 0..num_blocks-1`` and return results in block order."""
    if workers is None or workers <= 1 or num_blocks <= 1:
        return [func(b) for b in range(num_blocks)]
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(func, range(num_blocks)))


def pairwise_reduce(items, combine):
    """Tree-reduce ``items`` in a fixed pairing order.

    The pairing depends only on ``len(items)``, which keeps floating-point
    sums identical however the items were produced.
    """
    items = list(items)
    if not items:
        raise ValueError("nothing to reduce")
    while len(items) > 1:
        paired = [combine(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]
