"""Bundled sample data: a seeded CICIoT2023-like fixture plus toy sets.

The fixture generator emits raw 46-column shards (Table-style layout,
constant columns included) whose class structure mirrors the real corpus:
rst_count and inter-arrival time dominate the benign/attack separation,
a handful of secondary features carry weaker signal, the rest are noise.
A small share of rows per class is drawn from the opposite class's core
profile, which sets the irreducible error floor; continuous noise columns
give depth-limited ensembles room to overfit, which is what recursive
feature elimination later claws back.

Full-scale runs require a user-supplied data directory; this module only
stands in for it at test/demo scale.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ciciot import (
    CICIOT_CLASS_OF,
    CICIOT_RAW_FEATURES,
)
from .dataset import FeatureSchema
from .seeding import rng_for

# Post-clean rows per subcategory: benign matches Table-scale 2376; attack
# classes land above or below the 300 target so both undersampling and
# SMOTE paths are exercised (DDoS 1200, DoS 700, Mirai 450, Spoofing 330,
# Recon 280, Web 52, Bruteforce 28).
FIXTURE_COUNTS: dict[str, int] = {
    "Benign": 2376,
    "DDoS-ICMP_Flood": 100, "DDoS-UDP_Flood": 100, "DDoS-TCP_Flood": 100,
    "DDoS-PSHACK_Flood": 100, "DDoS-SYN_Flood": 100, "DDoS-RSTFINFlood": 100,
    "DDoS-SynonymousIP_Flood": 100, "DDoS-ICMP_Fragmentation": 100,
    "DDoS-UDP_Fragmentation": 100, "DDoS-ACK_Fragmentation": 100,
    "DDoS-HTTP_Flood": 100, "DDoS-SlowLoris": 100,
    "DoS-UDP_Flood": 175, "DoS-TCP_Flood": 175, "DoS-SYN_Flood": 175,
    "DoS-HTTP_Flood": 175,
    "Mirai-greeth_flood": 150, "Mirai-udpplain": 150, "Mirai-greip_flood": 150,
    "MITM-ArpSpoofing": 165, "DNS_Spoofing": 165,
    "Recon-HostDiscovery": 56, "Recon-OSScan": 56, "Recon-PortScan": 56,
    "Recon-PingSweep": 56, "VulnerabilityScan": 56,
    "BrowserHijacking": 9, "Backdoor_Malware": 9, "XSS": 9,
    "Uploading_Attack": 9, "SqlInjection": 8, "CommandInjection": 8,
    "DictionaryBruteForce": 28,
}

# Informative block, all drawn per class intensity and swapped wholesale
# on stealth rows. Heavy-tailed log-scale counters dominate tree split
# gain (rst_count and IAT far ahead, matching the corpus); bounded
# normal-scale and indicator features carry the separation Euclidean
# distance can actually see.
_LOG_FEATURES: dict[str, tuple[float, float, float]] = {
    # name: (benign log-mu, log-sigma, attack log-shift at intensity 1)
    "rst_count": (1.6, 0.9, 3.6),
    "IAT": (4.1, 0.8, -3.4),
    "urg_count": (0.3, 0.7, 1.7),
    "flow_duration": (2.6, 0.9, -1.6),
    "Variance": (2.1, 0.9, 1.8),
}
_NORMAL_FEATURES: dict[str, tuple[float, float, float]] = {
    # name: (benign mean, within-class sd, attack shift at intensity 1)
    "Header_Length": (120.0, 42.0, 62.0),
    "Rate": (25.0, 12.0, 16.0),
    "Std": (8.0, 4.0, 4.6),
    "ack_count": (3.0, 2.2, 2.4),
    "Covariance": (80.0, 45.0, 46.0),
}
_INDICATOR_FEATURES: dict[str, tuple[float, float]] = {
    # name: (benign prob, attack prob at intensity 1)
    "HTTPS": (0.66, 0.18),
    "HTTP": (0.30, 0.08),
    "syn_flag_number": (0.18, 0.55),
    "psh_flag_number": (0.44, 0.20),
}

# Per-class attack intensity scaling the shifts above; each attack row
# additionally draws a mild per-row multiplier. Flood traffic is blatant,
# recon/web sit closer to benign.
_CLASS_INTENSITY = {
    "DDoS": 1.00, "DoS": 0.95, "Mirai": 0.90,
    "Spoofing": 0.78, "Recon": 0.70, "Web": 0.72, "Bruteforce": 0.75,
}
_ROW_INTENSITY_RANGE = (0.80, 1.20)

# "Gray traffic": a slice of both classes draws the whole informative
# block from one shared low-intensity profile, so inside the slice the
# features carry no label signal at all and the posterior equals the
# attack/benign rate ratio (~0.65 attack). This pins part of the error
# floor and gives noisy splits inside the slice something to overfit,
# which the elimination stage later recovers.
_GRAY_ATTACK = 0.090
_GRAY_BENIGN = 0.050
_GRAY_INTENSITY = (0.30, 0.06)  # mean, sd of the shared slab intensity

# Stealth rows mimic the other class in the dominant counters and the
# protocol indicators but keep the weak normal-scale features at their
# true class: recovering them needs weak evidence stacked on top of the
# misleading dominant features, which favors stagewise boosting over
# independently grown bagged trees.
_STEALTH_ATTACK = 0.050
_STEALTH_BENIGN = 0.042

_CONSTANT_COLUMNS = {"Drate", "ece_flag_number", "cwr_flag_number", "Telnet", "SMTP", "IRC"}


@dataclass(frozen=True)
class FixtureSpec:
    counts: dict[str, int]
    seed: int = 20230
    n_shards: int = 3
    n_bad_rows: int = 9        # rows with NaN/inf cells, dropped by cleaning
    n_duplicate_rows: int = 6  # exact copies, dropped by cleaning


def _informative_block(
    rng: np.random.Generator, level: float, jitter: np.ndarray, n: int
) -> dict[str, np.ndarray]:
    """All class-separating columns at one class level (0 = benign).

    One latent intensity per row drives every feature (with a small
    per-feature wobble), so the margin is a smooth monotone function of a
    shared severity scale: low-intensity rows genuinely blend into the
    benign cloud.
    """
    lo, hi = _ROW_INTENSITY_RANGE
    if level == 0.0:
        row = np.zeros(n)
    else:
        row = level * rng.uniform(lo, hi, size=n)

    def intensities() -> np.ndarray:
        if level == 0.0:
            return row
        return row * rng.uniform(0.85, 1.15, size=n)

    out = {}
    pos = 0
    for name, (mu, sigma, shift) in _LOG_FEATURES.items():
        scale = intensities() * (1.0 + jitter[pos])
        out[name] = np.exp(rng.normal(mu + shift * scale, sigma, size=n))
        pos += 1
    for name, (mu, sd, shift) in _NORMAL_FEATURES.items():
        scale = intensities() * (1.0 + jitter[pos])
        out[name] = np.maximum(rng.normal(mu + shift * scale, sd, size=n), 0.0)
        pos += 1
    for name, (p_benign, p_attack) in _INDICATOR_FEATURES.items():
        prob = np.clip(p_benign + (p_attack - p_benign) * intensities(), 0.02, 0.98)
        out[name] = (rng.uniform(size=n) < prob).astype(float)
    return out


def _noise_features(rng: np.random.Generator, n: int) -> dict[str, np.ndarray]:
    cols: dict[str, np.ndarray] = {}
    continuous = {
        "Srate": (2.8, 1.1), "Duration": (3.9, 0.7), "Tot sum": (5.6, 0.9),
        "Min": (3.6, 0.6), "Max": (6.1, 0.7), "AVG": (4.9, 0.6),
        "Tot size": (4.9, 0.8), "Number": (2.3, 0.8), "Magnitude": (2.5, 0.5),
        "Radius": (2.7, 0.8), "Weight": (4.98, 0.35),
        "fin_count": (0.4, 0.8), "syn_count": (1.1, 0.9),
    }
    for name, (mu, sigma) in continuous.items():
        cols[name] = np.exp(rng.normal(mu, sigma, size=n))
    # near-balanced binary noise gives depth budget something to bite on
    # inside ambiguous regions; the elimination stage exists to undo that
    indicators = {
        "fin_flag_number": 0.50, "rst_flag_number": 0.47,
        "ack_flag_number": 0.52, "DNS": 0.45, "SSH": 0.05,
        "TCP": 0.55, "UDP": 0.44, "ARP": 0.04, "ICMP": 0.09,
        "IPv": 0.96, "LLC": 0.96, "DHCP": 0.02,
    }
    for name, prob in indicators.items():
        cols[name] = (rng.uniform(size=n) < prob).astype(float)
    cols["Protocol Type"] = rng.choice([1.0, 6.0, 17.0, 2.0], size=n, p=[0.1, 0.6, 0.25, 0.05])
    return cols


def _gray_block(rng: np.random.Generator, n: int) -> dict[str, np.ndarray]:
    """Shared low-intensity profile used by gray rows of either class."""
    mean, sd = _GRAY_INTENSITY
    level = np.clip(rng.normal(mean, sd, size=n), 0.10, 0.50)
    out = {}
    for name, (mu, sigma, shift) in _LOG_FEATURES.items():
        out[name] = np.exp(rng.normal(mu + shift * level, sigma, size=n))
    for name, (mu, sd_f, shift) in _NORMAL_FEATURES.items():
        out[name] = np.maximum(rng.normal(mu + shift * level, sd_f, size=n), 0.0)
    for name, (p_benign, p_attack) in _INDICATOR_FEATURES.items():
        prob = np.clip(p_benign + (p_attack - p_benign) * level, 0.02, 0.98)
        out[name] = (rng.uniform(size=n) < prob).astype(float)
    return out


def _rows_for_subcategory(subcat: str, n: int, seed: int) -> np.ndarray:
    """(n, 46) raw rows for one subcategory, gray and stealth rows included."""
    rng = rng_for(seed, "subcat", subcat)
    cls = CICIOT_CLASS_OF[subcat]
    benign = cls == "Benign"
    n_scaled = len(_LOG_FEATURES) + len(_NORMAL_FEATURES)
    jitter = rng.uniform(-0.15, 0.15, size=n_scaled)
    level = 0.0 if benign else _CLASS_INTENSITY[cls]
    gray_rate = _GRAY_BENIGN if benign else _GRAY_ATTACK
    stealth_rate = _STEALTH_BENIGN if benign else _STEALTH_ATTACK
    stealth_level = _CLASS_INTENSITY["DoS"] if benign else 0.0

    draw = rng.uniform(size=n)
    gray = draw < gray_rate
    stealth = (draw >= gray_rate) & (draw < gray_rate + stealth_rate)
    cols = _informative_block(rng, level, jitter, n)
    n_gray = int(gray.sum())
    if n_gray:
        shared = _gray_block(rng, n_gray)
        rows_idx = np.flatnonzero(gray)
        for name in shared:
            cols[name][rows_idx] = shared[name]
    n_stealth = int(stealth.sum())
    if n_stealth:
        swapped = _informative_block(rng, stealth_level, np.zeros(n_scaled), n_stealth)
        rows_idx = np.flatnonzero(stealth)
        for name in list(_LOG_FEATURES) + list(_INDICATOR_FEATURES):
            cols[name][rows_idx] = swapped[name]
    cols.update(_noise_features(rng, n))
    for name in _CONSTANT_COLUMNS:
        cols[name] = np.zeros(n)

    matrix = np.column_stack([cols[name] for name in CICIOT_RAW_FEATURES])
    return np.round(matrix, 6)


def generate_fixture_rows(spec: FixtureSpec) -> tuple[np.ndarray, list[str]]:
    """All clean rows (values, labels), shuffled once with the master seed."""
    blocks = []
    labels: list[str] = []
    for subcat in sorted(spec.counts):
        n = spec.counts[subcat]
        blocks.append(_rows_for_subcategory(subcat, n, spec.seed))
        labels.extend([subcat] * n)
    values = np.vstack(blocks)
    rng = rng_for(spec.seed, "shuffle")
    order = rng.permutation(values.shape[0])
    return values[order], [labels[i] for i in order]


def write_fixture(out_dir, spec: FixtureSpec | None = None) -> list[Path]:
    """Write the fixture as CSV shards; returns the shard paths.

    A few rows carry non-finite cells and a few are exact duplicates so
    ingestion cleaning has real work to do; cleaned counts equal
    ``spec.counts`` exactly.
    """
    spec = spec or FixtureSpec(counts=dict(FIXTURE_COUNTS))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    values, labels = generate_fixture_rows(spec)
    rng = rng_for(spec.seed, "dirt")

    rows: list[list[object]] = [list(v) + [lab] for v, lab in zip(values, labels)]
    # fabricate dirty rows from clean templates
    for i in range(spec.n_bad_rows):
        template = list(rows[int(rng.integers(len(rows)))])
        col = int(rng.integers(len(CICIOT_RAW_FEATURES)))
        template[col] = np.inf if i % 2 == 0 else ""
        rows.insert(int(rng.integers(len(rows))), template)
    for _ in range(spec.n_duplicate_rows):
        source = int(rng.integers(len(rows)))
        rows.insert(source + 1, list(rows[source]))

    header = list(CICIOT_RAW_FEATURES) + ["label"]
    shard_of = np.arange(len(rows)) % spec.n_shards
    paths = []
    for s in range(spec.n_shards):
        path = out_dir / f"ciciot_fixture_part{s + 1}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i, row in enumerate(rows):
                if shard_of[i] == s:
                    writer.writerow(
                        [("" if c == "" else repr(float(c)) if isinstance(c, (int, float)) else c)
                         for c in row[:-1]] + [row[-1]]
                    )
        paths.append(path)
    return paths


def make_planted(
    n: int = 1500,
    n_informative: int = 5,
    n_noise: int = 15,
    seed: int = 0,
    shift: float = 2.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Planted-feature set: (X, y, informative indices).

    Informative columns shift by class with per-column strengths; noise
    columns are standard normal. Used as the synthetic oracle where the
    real shards are unrecoverable.
    """
    rng = np.random.default_rng(seed)
    y = (rng.uniform(size=n) < 0.5).astype(np.int64)
    p = n_informative + n_noise
    X = rng.standard_normal((n, p))
    strengths = shift * (1.0 + 0.25 * np.arange(n_informative))
    informative = np.arange(n_informative)
    for rank, j in enumerate(informative):
        X[:, j] += strengths[rank] * y
    return X, y, informative
