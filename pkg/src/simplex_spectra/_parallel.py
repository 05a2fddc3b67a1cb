"""Seed streams and the thread cap.

Every Monte Carlo computation is split into fixed-size batches.  Batch ``i``
of a computation seeded with ``seed`` draws from
``SeedSequence(seed, spawn_key=(i,))``, so results never depend on how many
threads execute the batches, and reductions run in batch order.
"""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "SIMPLEX_SPECTRA_THREADS"
BATCH_SIZE = 1 << 17


def thread_cap():
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def batch_rng(seed, index):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def batch_sizes(total, batch=BATCH_SIZE):
    full, rest = divmod(total, batch)
    sizes = [batch] * full
    if rest:
        sizes.append(rest)
    return sizes


def ordered_map(fn, items):
    """``list(map(fn, items))`` on up to :func:`thread_cap` threads, results in input order."""
    items = list(items)
    workers = min(thread_cap(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
