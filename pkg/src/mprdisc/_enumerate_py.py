"""Pure numpy implementation of :mod:`mprdisc._enumerate` (same contract)."""
import math

import numpy as np
from scipy.special import logsumexp


def subset_log_marginals(corr, gram, yy, amps):
    corr = np.asarray(corr, dtype=float)
    gram = np.asarray(gram, dtype=float)
    amps = np.asarray(amps, dtype=float)
    K, G = len(corr), len(amps)
    if G == 0:
        raise ValueError("amplitude grid is empty")
    log_g = math.log(G)
    pair = np.multiply.outer(amps, amps)
    unary = [amps * amps * gram[i, i] - 2.0 * amps * corr[i] for i in range(K)]
    out = np.empty(1 << K)
    for mask in range(1 << K):
        idx = [i for i in range(K) if mask >> i & 1]
        k = len(idx)
        res = np.asarray(yy, dtype=float)
        for p, i in enumerate(idx):
            shape = [1] * k
            shape[p] = G
            res = res + unary[i].reshape(shape)
        for p in range(k):
            for q in range(p + 1, k):
                shape = [1] * k
                shape[p] = shape[q] = G
                res += (2.0 * gram[idx[p], idx[q]]) * pair.reshape(shape)
        out[mask] = logsumexp(-0.5 * res) - k * log_g
    return out
