"""Independent brute-force oracles used to verify the library's fast paths.

Everything here is deliberately naive: dense inverses, explicit window
enumeration, double loops, compensated summation. None of it shares code
with the implementations it checks.
"""

import math

import numpy as np


def naive_mvn_logpdf(x, mean, cov):
    """Multivariate normal log density via explicit inverse and slogdet."""
    x = np.asarray(x, dtype=float)
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    dim = mean.shape[0]
    inv = np.linalg.inv(cov)
    _, logdet = np.linalg.slogdet(cov)
    diff = x - mean
    return float(-0.5 * (dim * math.log(2 * math.pi) + logdet + diff @ inv @ diff))


def kahan_sum(values):
    total = 0.0
    comp = 0.0
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def weighted_moments(data, weights):
    """Weighted mean and covariance with compensated summation.

    Covariance uses the weighted mean itself (maximum-likelihood form,
    weights normalized by their sum).
    """
    data = np.asarray(data, dtype=float)
    weights = np.asarray(weights, dtype=float)
    n, dim = data.shape
    mass = kahan_sum(weights)
    mean = np.array([kahan_sum(weights * data[:, j]) / mass for j in range(dim)])
    cov = np.empty((dim, dim))
    for a in range(dim):
        for b in range(dim):
            terms = weights * (data[:, a] - mean[a]) * (data[:, b] - mean[b])
            cov[a, b] = kahan_sum(terms) / mass
    return mean, cov


def smcc_double_loop(mean, cov):
    """Keyword score: mean_i times the sum of squared covariances in row i."""
    dim = len(mean)
    scores = np.zeros(dim)
    for i in range(dim):
        acc = 0.0
        for j in range(dim):
            acc += cov[i][j] * cov[i][j]
        scores[i] = mean[i] * acc
    return scores


def enumerate_windows(token_docs, window_size):
    """Materialize every boolean sliding window as a set of tokens."""
    windows = []
    for tokens in token_docs:
        n = max(len(tokens) - window_size + 1, 1)
        for start in range(n):
            windows.append(set(tokens[start : start + window_size]))
    return windows


def window_counts(token_docs, words, window_size):
    """Total windows plus per-word and per-pair containment counts."""
    windows = enumerate_windows(token_docs, window_size)
    single = {w: 0 for w in words}
    pair = {}
    for win in windows:
        present = sorted(w for w in words if w in win)
        for i, a in enumerate(present):
            single[a] += 1
            for b in present[i + 1 :]:
                pair[(a, b)] = pair.get((a, b), 0) + 1
    return len(windows), single, pair


def cv_reference(topic_lists, token_docs, window_size, eps):
    """Reference Cv: NPMI word vectors against the summed topic vector."""
    words = set()
    for topic in topic_lists:
        words.update(topic)
    total, single, pair = window_counts(token_docs, words, window_size)

    def prob(w):
        return single[w] / total

    def joint(a, b):
        if a == b:
            return prob(a)
        key = (a, b) if a < b else (b, a)
        return pair.get(key, 0) / total

    def npmi(a, b):
        pa, pb, pab = prob(a), prob(b), joint(a, b)
        if pa <= 0.0 or pb <= 0.0:
            return 0.0
        if pab >= 1.0:
            return 1.0
        return math.log((pab + eps) / (pa * pb)) / (-math.log(pab + eps))

    per_topic = []
    for topic in topic_lists:
        m = len(topic)
        vectors = []
        for a in topic:
            if single[a] == 0:
                vectors.append([0.0] * m)
            else:
                vectors.append([npmi(a, b) if single[b] > 0 else 0.0 for b in topic])
        summed = [sum(vec[j] for vec in vectors) for j in range(m)]
        scores = []
        for vec in vectors:
            dot = sum(u * v for u, v in zip(vec, summed))
            nu = math.sqrt(sum(u * u for u in vec))
            nv = math.sqrt(sum(v * v for v in summed))
            scores.append(dot / (nu * nv) if nu > 0 and nv > 0 else 0.0)
        per_topic.append(sum(scores) / m)
    return per_topic, sum(per_topic) / len(per_topic)


def lda_collapsed_log_joint(doc_tokens, assignment, n_topics, n_terms, eta, rho):
    """Log joint P(z, w) of collapsed LDA (multinomials integrated out).

    assignment is a flat tuple of per-token topics in document order.
    """
    flat_docs = [d for d, tokens in enumerate(doc_tokens) for _ in tokens]
    flat_words = [w for tokens in doc_tokens for w in tokens]
    n_docs = len(doc_tokens)
    ndk = np.zeros((n_docs, n_topics))
    nkw = np.zeros((n_topics, n_terms))
    nk = np.zeros(n_topics)
    nd = np.zeros(n_docs)
    for d, w, z in zip(flat_docs, flat_words, assignment):
        ndk[d, z] += 1
        nkw[z, w] += 1
        nk[z] += 1
        nd[d] += 1
    logp = 0.0
    for d in range(n_docs):
        logp += math.lgamma(n_topics * eta) - math.lgamma(nd[d] + n_topics * eta)
        for k in range(n_topics):
            logp += math.lgamma(ndk[d, k] + eta) - math.lgamma(eta)
    for k in range(n_topics):
        logp += math.lgamma(n_terms * rho) - math.lgamma(nk[k] + n_terms * rho)
        for w in range(n_terms):
            logp += math.lgamma(nkw[k, w] + rho) - math.lgamma(rho)
    return logp


def tfidf_recount(token_docs, vocab_terms):
    """Two-pass TF-IDF recount with natural log."""
    index = {t: i for i, t in enumerate(vocab_terms)}
    n_docs = len(token_docs)
    df = [0] * len(vocab_terms)
    for tokens in token_docs:
        for t in set(tokens):
            if t in index:
                df[index[t]] += 1
    out = np.zeros((n_docs, len(vocab_terms)))
    for row, tokens in enumerate(token_docs):
        if not tokens:
            continue
        length = len(tokens)
        counts = {}
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
        for t, c in counts.items():
            col = index.get(t)
            if col is not None and df[col] > 0:
                out[row, col] = (c / length) * math.log(n_docs / df[col])
    return out
