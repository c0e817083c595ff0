"""Topic-model evaluation: Cv coherence, topic-count selection, t-test.

Cv estimates word and word-pair probabilities with boolean sliding windows
over each document, builds per-word NPMI vectors against the topic word
set, and scores each word by cosine similarity against the summed topic
vector. The two-sample pooled-variance t-test evaluates its own Student-t
tail through the regularized incomplete beta function, so no external
statistics dependency is involved.
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .corpus import ProcessedDocument
from .errors import ConfigError, DataError, NumericalError


@dataclass
class CoherenceConfig:
    top_n: int = 10
    window_size: int = 110
    npmi_epsilon: float = 1e-12

    def __post_init__(self):
        if self.top_n < 2:
            raise ConfigError("top-n must be >= 2")
        if self.window_size < 1:
            raise ConfigError("window-size must be >= 1")
        if self.npmi_epsilon <= 0:
            raise ConfigError("npmi-epsilon must be positive")


@dataclass
class CoherenceReport:
    per_topic: list[float]
    mean: float
    config: CoherenceConfig
    missing_words: list[str] = field(default_factory=list)


def count_windows(
    docs: Sequence[ProcessedDocument], words: set[str], window_size: int
) -> tuple[int, dict[str, int], dict[tuple[str, str], int]]:
    """Boolean sliding-window occurrence counts for ``words``.

    Every document contributes max(len - window + 1, 1) windows; a document
    shorter than the window is a single window. Returns the total window
    count, per-word window counts, and per-pair (sorted tuple) counts.
    """
    total = 0
    single: dict[str, int] = {w: 0 for w in words}
    pair: dict[tuple[str, str], int] = {}
    for doc in docs:
        tokens = doc.tokens
        length = len(tokens)
        n_windows = max(length - window_size + 1, 1)
        total += n_windows
        # Multiset of relevant tokens inside the sliding window.
        counts: dict[str, int] = {}
        for t in tokens[: min(window_size, length)]:
            if t in single:
                counts[t] = counts.get(t, 0) + 1
        for start in range(n_windows):
            if start > 0:
                left = tokens[start - 1]
                if left in counts:
                    counts[left] -= 1
                    if counts[left] == 0:
                        del counts[left]
                right = tokens[start + window_size - 1]
                if right in single:
                    counts[right] = counts.get(right, 0) + 1
            present = sorted(counts)
            for i, a in enumerate(present):
                single[a] += 1
                for b in present[i + 1 :]:
                    key = (a, b)
                    pair[key] = pair.get(key, 0) + 1
    return total, single, pair


def _npmi(p_i: float, p_j: float, p_ij: float, eps: float) -> float:
    if p_i <= 0.0 or p_j <= 0.0:
        return 0.0
    if p_ij >= 1.0:
        return 1.0  # co-occurrence in every window: perfect association
    num = math.log((p_ij + eps) / (p_i * p_j))
    den = -math.log(p_ij + eps)
    return num / den


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def cv_coherence(
    topics: Sequence[Sequence[str]],
    docs: Sequence[ProcessedDocument],
    cfg: Optional[CoherenceConfig] = None,
) -> CoherenceReport:
    """Cv coherence of topic word lists against a reference corpus.

    Per topic: each word's NPMI vector against the topic's word set is
    compared (cosine) with the sum of all the topic's word vectors; the
    topic score is the mean over words, and the overall score the mean over
    topics. Words never observed in any window get zero vectors and are
    reported in the diagnostics.
    """
    cfg = cfg or CoherenceConfig()
    if not docs:
        raise DataError("coherence needs a non-empty reference corpus")
    cleaned: list[list[str]] = []
    for idx, topic_words in enumerate(topics):
        distinct = list(dict.fromkeys(topic_words))
        if len(distinct) < 2:
            raise ConfigError(f"topic {idx} needs at least 2 distinct words")
        cleaned.append(distinct)

    vocabulary = set().union(*cleaned)
    total, single, pair = count_windows(docs, vocabulary, cfg.window_size)

    def p_single(w: str) -> float:
        return single[w] / total

    def p_pair(a: str, b: str) -> float:
        if a == b:
            return p_single(a)
        key = (a, b) if a < b else (b, a)
        return pair.get(key, 0) / total

    missing: list[str] = []
    per_topic: list[float] = []
    for topic_words in cleaned:
        m = len(topic_words)
        vectors = np.zeros((m, m))
        for i, w_i in enumerate(topic_words):
            if single[w_i] == 0:
                if w_i not in missing:
                    missing.append(w_i)
                continue  # vector stays zero
            for j, w_j in enumerate(topic_words):
                if single[w_j] == 0:
                    continue
                vectors[i, j] = _npmi(
                    p_single(w_i), p_single(w_j), p_pair(w_i, w_j), cfg.npmi_epsilon
                )
        topic_vector = vectors.sum(axis=0)
        scores = [_cosine(vectors[i], topic_vector) for i in range(m)]
        per_topic.append(float(np.mean(scores)))

    return CoherenceReport(
        per_topic=per_topic,
        mean=float(np.mean(per_topic)),
        config=cfg,
        missing_words=missing,
    )


# ---------------------------------------------------------------------------
# Student-t tail via the regularized incomplete beta function


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz)."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise NumericalError(f"incomplete beta continued fraction stalled at a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), accurate to ~1e-14."""
    if a <= 0 or b <= 0:
        raise ConfigError("incomplete beta requires a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_tail(t: float, df: int) -> float:
    """Upper-tail probability P(T > t) of Student's t with ``df`` degrees."""
    if df < 1:
        raise ConfigError("degrees of freedom must be >= 1")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    half = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return half if t >= 0 else 1.0 - half


def student_t_critical(alpha: float, df: int) -> float:
    """One-tailed critical value: the t with upper-tail probability alpha."""
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    if alpha == 0.5:
        return 0.0
    if alpha > 0.5:
        return -student_t_critical(1.0 - alpha, df)
    lo, hi = 0.0, 1.0
    while student_t_tail(hi, df) > alpha:
        hi *= 2.0
        if hi > 1e12:
            raise NumericalError("t critical value search diverged")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if student_t_tail(mid, df) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


@dataclass
class TTestResult:
    t_estimated: Optional[float]
    df: int
    t_critical: float
    p_value: Optional[float]
    reject_null: bool
    alpha: float
    undefined: bool = False
    note: str = ""


def pooled_t_test(
    mean1: float,
    sd1: float,
    n1: int,
    mean2: float,
    sd2: float,
    n2: int,
    alpha: float = 0.05,
) -> TTestResult:
    """One-tailed two-sample t-test with pooled variance.

    Tests H1: mu1 > mu2 with df = n1 + n2 - 2. Zero pooled variance with
    equal means leaves t undefined and is reported as such.
    """
    if n1 < 2 or n2 < 2:
        raise ConfigError("each sample needs n >= 2")
    if sd1 < 0 or sd2 < 0:
        raise ConfigError("standard deviations must be >= 0")
    df = n1 + n2 - 2
    t_critical = student_t_critical(alpha, df)
    pooled_var = ((n1 - 1) * sd1 * sd1 + (n2 - 1) * sd2 * sd2) / df
    se = math.sqrt(pooled_var * (1.0 / n1 + 1.0 / n2))
    delta = mean1 - mean2
    if se == 0.0:
        if delta == 0.0:
            return TTestResult(
                t_estimated=None,
                df=df,
                t_critical=t_critical,
                p_value=None,
                reject_null=False,
                alpha=alpha,
                undefined=True,
                note="zero pooled variance with equal means: t undefined",
            )
        t = math.inf if delta > 0 else -math.inf
    else:
        t = delta / se
    p = student_t_tail(t, df)
    return TTestResult(
        t_estimated=t,
        df=df,
        t_critical=t_critical,
        p_value=p,
        reject_null=t > t_critical,
        alpha=alpha,
    )


def coherence_stats(per_topic: Sequence[float]) -> tuple[float, float, int]:
    """Sample mean, sample standard deviation, and count of per-topic scores."""
    arr = np.asarray(per_topic, dtype=float)
    n = arr.size
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1)) if n > 1 else 0.0
    return mean, sd, n


# ---------------------------------------------------------------------------
# Topic-count selection


@dataclass
class KSweepRow:
    k: int
    metrics: dict[str, dict[str, float]]
    difference: Optional[float] = None
    failed: bool = False
    error: str = ""


@dataclass
class KSweepResult:
    rows: list[KSweepRow]
    selected_k: Optional[int]
    normalization: str


def select_topic_count(
    k_values: Sequence[int],
    fitters: dict[str, Callable[[int], tuple[float, float]]],
    normalization: str = "minmax",
) -> KSweepResult:
    """Sweep topic counts and pick the K minimizing |coherence - perplexity|.

    Each fitter maps K to (mean coherence, log-perplexity-like score). The
    perplexity column of each fitter is minmax-normalized across the sweep
    (the two quantities live on different scales; the normalization choice
    is configurable and echoed in the result), both metrics are averaged
    over fitters, and the K with the smallest absolute difference wins.
    Rows whose fit fails are recorded and excluded from the argmin.
    """
    if normalization not in ("minmax", "none"):
        raise ConfigError("normalization must be 'minmax' or 'none'")
    if not fitters:
        raise ConfigError("select_topic_count needs at least one fitter")
    rows: list[KSweepRow] = []
    for k in k_values:
        row = KSweepRow(k=k, metrics={})
        for name, fit in fitters.items():
            try:
                mean_cv, log_pp = fit(k)
            except Exception as exc:  # record and move on; row is excluded
                row.failed = True
                row.error = f"{name}: {exc}"
                break
            row.metrics[name] = {"mean_cv": float(mean_cv), "log_perplexity": float(log_pp)}
        rows.append(row)

    ok = [row for row in rows if not row.failed]
    if ok:
        norm_pp: dict[int, dict[str, float]] = {row.k: {} for row in ok}
        for name in fitters:
            values = [row.metrics[name]["log_perplexity"] for row in ok]
            lo, hi = min(values), max(values)
            for row, value in zip(ok, values):
                if normalization == "none" or hi == lo:
                    scaled = value if normalization == "none" else 0.5
                else:
                    scaled = (value - lo) / (hi - lo)
                norm_pp[row.k][name] = scaled
        for row in ok:
            cv_avg = float(np.mean([row.metrics[n]["mean_cv"] for n in fitters]))
            pp_avg = float(np.mean([norm_pp[row.k][n] for n in fitters]))
            row.difference = abs(cv_avg - pp_avg)

    selected = None
    best = math.inf
    for row in ok:
        if row.difference < best:
            best = row.difference
            selected = row.k
    return KSweepResult(rows=rows, selected_k=selected, normalization=normalization)
