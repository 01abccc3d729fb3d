"""Seeded synthetic stand-in datasets for offline runs.

The real benchmark datasets live behind `stageaudit fetch-datasets` (network
required). These generators produce stand-ins with the same schema shape and
the documented group/label structure: a credit dataset whose raw feature
space carries a male-favoring signal while its numeric profile mildly favors
female applicants, and a recidivism-score dataset whose score is nearly
deterministic in (prior offense, age band) with race-skewed inputs.
Everything is a pure function of the seed.
"""

from __future__ import annotations

import csv
import os

import numpy as np

GERMAN_SEED = 20240
COMPAS_SEED = 60210


def _choice(rng, values, p, size):
    return rng.choice(np.array(values, dtype=object), size=size, p=p)


def make_credit_rows(n=1000, seed=GERMAN_SEED):
    """Credit-risk stand-in: 20 features, sex-skewed outcome structure."""
    rng = np.random.default_rng(seed)
    male = rng.random(n) < 0.69
    sex = np.where(male, "male", "female")
    solvency = rng.normal(size=n)

    # Numeric profile: women ask for smaller/shorter credits on average,
    # which is the legitimately favorable direction.
    log_amount = (7.9 - 0.30 * solvency + 0.55 * rng.normal(size=n)
                  + np.where(male, 0.22, 0.0))
    credit_amount = np.round(np.exp(log_amount)).astype(int)
    duration = np.clip(np.round(18 - 4.5 * solvency + 9 * rng.normal(size=n)
                                + np.where(male, 2.0, 0.0)), 4, 72).astype(int)
    age = np.clip(np.round(35 + 4 * solvency + 10 * rng.normal(size=n)
                           + np.where(male, 2.0, -1.0)), 19, 75).astype(int)
    installment_rate = rng.integers(1, 5, size=n)
    residence_since = np.clip(
        np.round(2.4 + 1.1 * rng.normal(size=n)), 1, 4).astype(int)
    existing_credits = np.clip(rng.poisson(1.3, size=n) + 1, 1, 4)
    num_dependents = np.where(rng.random(n) < 0.85, 1, 2)

    def status_from(latent, cuts, tokens):
        idx = np.digitize(latent, cuts)
        return np.array(tokens, dtype=object)[idx]

    # checking status: better status tracks solvency and skews male
    chk_latent = 0.9 * solvency + np.where(male, 0.9, 0.0) \
        + 0.8 * rng.normal(size=n)
    checking_status = status_from(chk_latent, [-0.6, 0.2, 1.0],
                                  ["lt0", "0to200", "ge200", "none"])
    sav_latent = 0.7 * solvency + 0.9 * rng.normal(size=n)
    savings_status = status_from(sav_latent, [-0.3, 0.5, 1.2, 1.8],
                                 ["lt100", "100to500", "500to1000",
                                  "ge1000", "unknown"])
    emp_latent = 0.5 * solvency + 0.03 * (age - 35) + 0.8 * rng.normal(size=n)
    employment_since = status_from(emp_latent, [-0.8, -0.1, 0.6, 1.3],
                                   ["unemployed", "lt1y", "1to4y",
                                    "4to7y", "ge7y"])
    credit_history = _choice(rng, ["none_taken", "all_paid", "existing_paid",
                                   "delayed", "critical"],
                             [0.04, 0.05, 0.53, 0.09, 0.29], n)
    purpose = _choice(rng, ["newcar", "usedcar", "furniture", "radiotv",
                            "appliances", "repairs", "education", "retraining",
                            "business", "other"],
                      [0.23, 0.10, 0.18, 0.28, 0.02, 0.02, 0.05, 0.01,
                       0.10, 0.01], n)
    other_debtors = _choice(rng, ["none", "coapplicant", "guarantor"],
                            [0.91, 0.04, 0.05], n)
    prop_latent = 0.6 * solvency + 0.9 * rng.normal(size=n)
    property_ = status_from(prop_latent, [-0.5, 0.3, 1.0],
                            ["unknown", "car", "savings", "realestate"])
    other_installment_plans = _choice(rng, ["bank", "stores", "none"],
                                      [0.14, 0.05, 0.81], n)
    housing = _choice(rng, ["rent", "own", "free"], [0.18, 0.71, 0.11], n)
    job = _choice(rng, ["unskilled_nonres", "unskilled", "skilled",
                        "management"], [0.02, 0.20, 0.63, 0.15], n)
    telephone = _choice(rng, ["none", "yes"], [0.60, 0.40], n)
    foreign_worker = _choice(rng, ["yes", "no"], [0.96, 0.04], n)

    # Outcome: solvency and the numeric profile dominate; a direct male
    # advantage plus the male-skewed checking channel make the raw feature
    # space favor men, while the (smaller) female amounts favor women once
    # only numeric structure survives preprocessing.
    z_amount = (log_amount - log_amount.mean()) / log_amount.std()
    z_duration = (duration - duration.mean()) / duration.std()
    chk_good = np.isin(checking_status, ["ge200", "none"]).astype(float)
    logit = (0.45 + 0.9 * solvency - 0.55 * z_amount - 0.45 * z_duration
             + 0.8 * chk_good + 0.012 * (age - 35)
             + np.where(male, 1.0, 0.0))
    good = rng.random(n) < 1.0 / (1.0 + np.exp(-logit))
    credit_risk = np.where(good, "good", "bad")

    header = ["checking_status", "duration", "credit_history", "purpose",
              "credit_amount", "savings_status", "employment_since",
              "installment_rate", "sex", "other_debtors", "residence_since",
              "property", "age", "other_installment_plans", "housing",
              "existing_credits", "job", "num_dependents", "telephone",
              "foreign_worker", "credit_risk"]
    cols = [checking_status, duration, credit_history, purpose, credit_amount,
            savings_status, employment_since, installment_rate, sex,
            other_debtors, residence_since, property_, age,
            other_installment_plans, housing, existing_credits, job,
            num_dependents, telephone, foreign_worker, credit_risk]
    rows = [[str(c[i]) for c in cols] for i in range(n)]
    return header, rows


def make_recidivism_rows(n=6000, seed=COMPAS_SEED):
    """Recidivism-score stand-in mirroring the screening-data pipeline."""
    rng = np.random.default_rng(seed)
    race = _choice(rng, ["African-American", "Caucasian", "Hispanic", "Other"],
                   [0.51, 0.34, 0.08, 0.07], n)
    aa = race == "African-American"
    sex = _choice(rng, ["Male", "Female"], [0.81, 0.19], n)
    age = np.clip(np.round(np.where(aa, 31, 36)
                           + 10 * rng.normal(size=n)), 18, 75).astype(int)
    young = age < 30
    priors = rng.poisson(np.where(aa, 3.2, 1.7)).astype(int)
    p_recid = 1.0 / (1.0 + np.exp(-(-1.1 + 0.85 * young + 0.28 * priors)))
    is_recid = (rng.random(n) < p_recid).astype(int)
    # screening bookkeeping: a small share invalid / out of range
    days = np.round(rng.normal(0, 14, size=n)).astype(int)
    far = rng.random(n) < 0.06
    days[far] = np.round(rng.normal(0, 80, size=int(far.sum()))).astype(int)
    unknown = rng.random(n) < 0.015
    is_recid[unknown] = -1
    charge = _choice(rng, ["F", "M", "O"], [0.64, 0.35, 0.01], n)

    # score: high risk is nearly deterministic in (is_recid, young) with a
    # race-dependent push, so the screening score itself is race-skewed
    base = (is_recid == 1) & young
    p_high = np.where(base, 0.93, 0.03)
    p_high = p_high + np.where(aa, 0.05, -0.02)
    p_high = np.clip(p_high, 0.0, 1.0)
    high = rng.random(n) < p_high
    score_text = np.where(high, "High", "Low").astype(object)
    medium = (~high) & (rng.random(n) < 0.08)
    score_text[medium] = "Medium"
    na = rng.random(n) < 0.02
    score_text[na] = "N/A"

    header = ["race", "sex", "age", "priors_count",
              "days_b_screening_arrest", "c_charge_degree", "is_recid",
              "score_text"]
    cols = [race, sex, age, priors, days, charge, is_recid, score_text]
    rows = [[str(c[i]) for c in cols] for i in range(n)]
    return header, rows


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


CREDIT_CONFIG = """\
# Synthetic stand-in for the 1000-row credit-risk benchmark (see README).
[dataset]
name = "german_synth"
csv = "german_synth.csv"
label_column = "credit_risk"
favorable_label = "good"
include_sensitive = true
missing_tokens = ["", "NA", "?"]

[dataset.group]
sensitive_column = "sex"
privileged_values = ["male"]

[[dataset.prelude]]
kind = "onehot"
name = "encode"

{columns}
"""

RECIDIVISM_CONFIG = """\
# Synthetic stand-in for the recidivism screening dataset (see README).
[dataset]
name = "compas_synth"
csv = "compas_synth.csv"
label_column = "score_text"
favorable_label = "Low"
include_sensitive = false
missing_tokens = ["", "NA"]

[dataset.label_replacements]
Medium = "Low"

[dataset.group]
sensitive_column = "race"
privileged_values = ["Caucasian"]

[[dataset.prelude]]
kind = "column_drop"
name = "keep_screening_features"
params = {{ drop = ["sex", "priors_count", "days_b_screening_arrest", "c_charge_degree"] }}

[[dataset.prelude]]
kind = "onehot"
name = "encode"

{columns}
"""


def _columns_toml(spec):
    out = []
    for name, kind, miss in spec:
        out.append("[[dataset.columns]]")
        out.append(f'name = "{name}"')
        out.append(f'kind = "{kind}"')
        out.append(f"allowed_missing = {'true' if miss else 'false'}")
        out.append("")
    return "\n".join(out)


CREDIT_COLUMNS = [
    ("checking_status", "categorical", False),
    ("duration", "numeric", False),
    ("credit_history", "categorical", False),
    ("purpose", "categorical", False),
    ("credit_amount", "numeric", False),
    ("savings_status", "categorical", False),
    ("employment_since", "categorical", False),
    ("installment_rate", "numeric", False),
    ("sex", "categorical", False),
    ("other_debtors", "categorical", False),
    ("residence_since", "numeric", False),
    ("property", "categorical", False),
    ("age", "numeric", False),
    ("other_installment_plans", "categorical", False),
    ("housing", "categorical", False),
    ("existing_credits", "numeric", False),
    ("job", "categorical", False),
    ("num_dependents", "numeric", False),
    ("telephone", "categorical", False),
    ("foreign_worker", "categorical", False),
    ("credit_risk", "categorical", False),
]

RECIDIVISM_COLUMNS = [
    ("race", "categorical", False),
    ("sex", "categorical", False),
    ("age", "numeric", False),
    ("priors_count", "numeric", False),
    ("days_b_screening_arrest", "numeric", False),
    ("c_charge_degree", "categorical", False),
    ("is_recid", "categorical", False),
    ("score_text", "categorical", False),
]


def generate(out_dir, which=("german_synth", "compas_synth")) -> list[str]:
    """Write the stand-in CSVs and their dataset configs; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if "german_synth" in which:
        header, rows = make_credit_rows()
        csv_path = os.path.join(out_dir, "german_synth.csv")
        write_csv(csv_path, header, rows)
        cfg_path = os.path.join(out_dir, "german_synth.toml")
        with open(cfg_path, "w", encoding="utf-8") as fh:
            fh.write(CREDIT_CONFIG.format(
                columns=_columns_toml(CREDIT_COLUMNS)))
        written += [csv_path, cfg_path]
    if "compas_synth" in which:
        header, rows = make_recidivism_rows()
        csv_path = os.path.join(out_dir, "compas_synth.csv")
        write_csv(csv_path, header, rows)
        cfg_path = os.path.join(out_dir, "compas_synth.toml")
        with open(cfg_path, "w", encoding="utf-8") as fh:
            fh.write(RECIDIVISM_CONFIG.format(
                columns=_columns_toml(RECIDIVISM_COLUMNS)))
        written += [csv_path, cfg_path]
    return written
