"""Benchmark dataset acquisition with checksum verification.

Downloads go to a temp file and move into place atomically; a .sha256
sidecar records the digest on first fetch and is verified on every later
run, so cached copies keep working offline. A checksum mismatch or network
failure leaves existing files untouched.
"""

from __future__ import annotations

import csv
import hashlib
import io
import os
import urllib.error
import urllib.request

from .errors import FetchError

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

SOURCES = {
    "german": {
        "url": f"{UCI}/statlog/german/german.data",
        "format": "space",
        "expected_rows": 1000,
    },
    "adult": {
        "url": f"{UCI}/adult/adult.data",
        "format": "csv_noheader",
        "expected_rows": 32561,
    },
    "bank": {
        "url": ("https://archive.ics.uci.edu/static/public/222/"
                "bank+marketing.zip"),
        "format": "zip",
        "expected_rows": 41188,
    },
    "compas": {
        "url": ("https://raw.githubusercontent.com/propublica/"
                "compas-analysis/master/compas-scores-two-years.csv"),
        "format": "csv",
        "expected_rows": 7214,
    },
}

# canonical group/favorability choices for the benchmark datasets
GERMAN_HEADER = [
    "checking_status", "duration", "credit_history", "purpose",
    "credit_amount", "savings_status", "employment_since",
    "installment_rate", "personal_status_sex", "other_debtors",
    "residence_since", "property", "age", "other_installment_plans",
    "housing", "existing_credits", "job", "num_dependents", "telephone",
    "foreign_worker", "credit_risk",
]
GERMAN_NUMERIC = {"duration", "credit_amount", "installment_rate",
                  "residence_since", "age", "existing_credits",
                  "num_dependents"}

ADULT_HEADER = [
    "age", "workclass", "fnlwgt", "education", "education_num",
    "marital_status", "occupation", "relationship", "race", "sex",
    "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
]
ADULT_NUMERIC = {"age", "fnlwgt", "education_num", "capital_gain",
                 "capital_loss", "hours_per_week"}


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _sidecar(path) -> str:
    return path + ".sha256"


def verify(path) -> bool:
    """True when the file exists and matches its recorded digest."""
    side = _sidecar(path)
    if not (os.path.exists(path) and os.path.exists(side)):
        return False
    with open(side, encoding="utf-8") as fh:
        recorded = fh.read().strip()
    return sha256_file(path) == recorded


def _record(path) -> None:
    with open(_sidecar(path), "w", encoding="utf-8") as fh:
        fh.write(sha256_file(path) + "\n")


def _download(url: str) -> bytes:
    try:
        with urllib.request.urlopen(url, timeout=60) as resp:
            return resp.read()
    except (urllib.error.URLError, OSError, TimeoutError) as exc:
        raise FetchError(f"download failed for {url}: {exc}") from exc


def _german_to_csv(raw: bytes) -> str:
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(GERMAN_HEADER)
    for line in raw.decode("utf-8").splitlines():
        parts = line.split()
        if not parts:
            continue
        if len(parts) != len(GERMAN_HEADER):
            raise FetchError("unexpected field count in german.data")
        # numeric label 1/2 -> good/bad
        parts[-1] = {"1": "good", "2": "bad"}[parts[-1]]
        w.writerow(parts)
    return out.getvalue()


def _adult_to_csv(raw: bytes) -> str:
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(ADULT_HEADER)
    for line in raw.decode("utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != len(ADULT_HEADER):
            raise FetchError("unexpected field count in adult.data")
        w.writerow(parts)
    return out.getvalue()


def _bank_to_csv(raw: bytes) -> str:
    import zipfile
    with zipfile.ZipFile(io.BytesIO(raw)) as outer:
        inner = outer.read("bank-additional.zip")
    with zipfile.ZipFile(io.BytesIO(inner)) as zf:
        text = zf.read("bank-additional/bank-additional-full.csv").decode()
    rows = list(csv.reader(io.StringIO(text), delimiter=";"))
    out = io.StringIO()
    w = csv.writer(out)
    for row in rows:
        w.writerow([c.strip('"') for c in row])
    return out.getvalue()


_CONVERTERS = {
    "german": _german_to_csv,
    "adult": _adult_to_csv,
    "bank": _bank_to_csv,
    "compas": lambda raw: raw.decode("utf-8"),
}

CONFIG_TEMPLATES = {
    "german": """\
[dataset]
name = "german"
csv = "german.csv"
label_column = "credit_risk"
favorable_label = "good"
include_sensitive = true
missing_tokens = ["", "NA"]

[dataset.group]
sensitive_column = "personal_status_sex"
# A92/A95: female tokens in the raw encoding; privileged group is male
privileged_values = ["A91", "A93", "A94"]

[[dataset.prelude]]
kind = "onehot"
name = "encode"
""",
    "adult": """\
[dataset]
name = "adult"
csv = "adult.csv"
label_column = "income"
favorable_label = ">50K"
include_sensitive = true
missing_tokens = ["", "?"]

[dataset.group]
sensitive_column = "sex"
privileged_values = ["Male"]

[[dataset.prelude]]
kind = "imputer"
name = "impute_categoricals"
params = { strategy = "most_frequent" }

[[dataset.prelude]]
kind = "onehot"
name = "encode"
""",
}


def _columns_toml(header, numeric, missing_allowed=()):
    lines = []
    for name in header:
        lines.append("[[dataset.columns]]")
        lines.append(f'name = "{name}"')
        kind = "numeric" if name in numeric else "categorical"
        lines.append(f'kind = "{kind}"')
        miss = "true" if name in missing_allowed else "false"
        lines.append(f"allowed_missing = {miss}")
        lines.append("")
    return "\n".join(lines)


def fetch(name: str, out_dir: str, offline: bool = False) -> str:
    """Fetch (or verify) one dataset; returns the CSV path."""
    if name not in SOURCES:
        raise FetchError(f"unknown dataset {name!r}; "
                         f"known: {sorted(SOURCES)}")
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{name}.csv")
    if verify(csv_path):
        return csv_path
    if os.path.exists(csv_path) and os.path.exists(_sidecar(csv_path)):
        raise FetchError(f"{csv_path}: checksum mismatch; refusing to "
                         "overwrite (delete the file to re-fetch)")
    if offline:
        raise FetchError(f"{csv_path}: not cached and offline mode set")
    raw = _download(SOURCES[name]["url"])
    text = _CONVERTERS[name](raw)
    rows = text.count("\n") - 1
    expected = SOURCES[name]["expected_rows"]
    if rows != expected:
        raise FetchError(f"{name}: expected {expected} rows, got {rows}")
    tmp = csv_path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, csv_path)
    _record(csv_path)
    _write_config(name, out_dir)
    return csv_path


def _write_config(name: str, out_dir: str) -> None:
    if name == "german":
        body = CONFIG_TEMPLATES["german"] + "\n" + _columns_toml(
            GERMAN_HEADER, GERMAN_NUMERIC)
    elif name == "adult":
        body = CONFIG_TEMPLATES["adult"] + "\n" + _columns_toml(
            ADULT_HEADER, ADULT_NUMERIC, missing_allowed={
                "workclass", "occupation", "native_country"})
    else:
        return  # bank/compas configs are written by hand per experiment
    with open(os.path.join(out_dir, f"{name}.toml"), "w",
              encoding="utf-8") as fh:
        fh.write(body)
