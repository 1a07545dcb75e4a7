"""Command-line front end for building instances and running report jobs.

Jobs are described by a JSON config; flags override the config fields they
duplicate.  Every run writes a JSON report plus a plain-text summary into the
output directory, and identical (config, seed) pairs produce byte-identical
artifacts.  Exit codes: 0 success, 1 invariant failure during the job,
2 config error.

Config schema (all fields optional, defaults shown):

  {
    "algebra": {"kind": "heisenberg", "cutoff": 6},        # or kind "trivial"
    "module":  {"lam": "0", "depth": 6, "f": [[0, 0, "1"]]},
    "x":       {"kind": null, "weight_cap": null},          # c1 | c2; kind
                                                            # defaults by task
    "task": "verify",            # verify | normalize | spanning | cofiniteness
    "seed": 0,
    "out": "artifacts",
    "cache": {"enabled": true, "dir": null},                # dir: <out>/cache
    "verify":    {"residue_window": 6, "index_range": 2, "sample_limit": 60},
    "normalize": {"variant": "diff0", "ordering": "by-index",
                  "expression": [], "budget": 100000},
    "spanning":  {"n": 2, "depth_cap": null},
    "cofiniteness": {"n_max": 4, "depth_cap": null}
  }

The module section decorates the instance with the polynomial f (entries
[i, j, coefficient] with f(0,0) = 1); for the trivial algebra the module is
the algebra acting on itself and lam is ignored.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import random
import sys
from typing import Dict, List, Optional, Tuple

from .algebra import (AlgebraInstance, c1_subspace, c_n_subspace, check_axioms,
                      quotient_representatives)
from .cofinite import (cofinite_equivalence_check, module_cn_quotient,
                       uniform_annihilation_order, verify_annihilation)
from .exact import QuasiPolynomial, as_rational, format_rational, quasi_poly
from .heisenberg import (build_adjoint_quasimodule, build_fock_quasimodule,
                         build_heisenberg, build_trivial_algebra, weight_zero_state)
from .identities import verify_residue_derivation
from .modes import evaluate, expression_from_json, expression_to_json
from .quasimodule import TruncationOverflow, validate_quasimodule
from .rewrite import (AnnihilationViolation, BudgetExceeded, MetricViolation,
                      NormalizationTrace, normalize_diff0, normalize_diff1)

TASKS = ("verify", "normalize", "spanning", "cofiniteness")

DEFAULT_F_BATTERY = [
    [[0, 0, "1"]],
    [[0, 0, "1"], [1, 0, "1"]],
    [[0, 0, "1"], [0, 1, "1"]],
    [[0, 0, "1"], [1, 1, "1"]],
    [[0, 0, "1"], [1, 0, "1"], [0, 1, "1"], [1, 1, "1"]],
]

DEFAULTS = {
    "algebra": {"kind": "heisenberg", "cutoff": 6},
    "module": {"lam": "0", "depth": 6, "f": [[0, 0, "1"]]},
    "x": {"kind": None, "weight_cap": None},
    "task": "verify",
    "seed": 0,
    "out": "artifacts",
    "cache": {"enabled": True, "dir": None},
    "verify": {"residue_window": 6, "index_range": 2, "sample_limit": 60},
    "normalize": {"variant": "diff0", "ordering": "by-index",
                  "expression": [], "budget": 100000},
    "spanning": {"n": 2, "depth_cap": None},
    "cofiniteness": {"n_max": 4, "depth_cap": None},
}


class ConfigError(ValueError):
    """Raised for schema violations; the CLI maps it to exit code 2."""


# ---------------------------------------------------------------------------
# config handling


def _merge_defaults(raw: Dict) -> Dict:
    config = copy.deepcopy(DEFAULTS)
    for key, value in raw.items():
        if key not in config:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(config[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {key!r} must be an object")
            for sub, subval in value.items():
                if sub not in config[key]:
                    raise ConfigError(f"unknown config key {key}.{sub}")
                config[key][sub] = subval
        else:
            config[key] = value
    return config


def _require_int(value, name: str, minimum: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


def _parse_f(entries, name: str) -> QuasiPolynomial:
    if not isinstance(entries, list):
        raise ConfigError(f"{name} must be a list of [i, j, coefficient] entries")
    terms = {}
    for entry in entries:
        if not (isinstance(entry, list) and len(entry) == 3):
            raise ConfigError(f"{name} entries must be [i, j, coefficient] triples")
        i, j, c = entry
        if not isinstance(i, int) or not isinstance(j, int) or i < 0 or j < 0:
            raise ConfigError(f"{name} exponents must be nonnegative integers")
        try:
            terms[(i, j)] = as_rational(c)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ConfigError(f"{name} coefficient {c!r} is not rational") from exc
    try:
        return quasi_poly(terms)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def resolve_config(raw: Dict, overrides: Optional[Dict] = None) -> Dict:
    """Validate, default, and canonicalize a raw config dict.

    Flag overrides are applied before validation so the echoed config in each
    report describes what actually ran.
    """
    config = _merge_defaults(raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            config[key] = value

    kind = config["algebra"]["kind"]
    if kind not in ("heisenberg", "trivial"):
        raise ConfigError(f"algebra.kind must be heisenberg or trivial, got {kind!r}")
    if kind == "heisenberg":
        _require_int(config["algebra"]["cutoff"], "algebra.cutoff", 2)
    else:
        _require_int(config["algebra"]["cutoff"], "algebra.cutoff", 0)

    try:
        lam = as_rational(config["module"]["lam"])
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(f"module.lam is not rational: {exc}") from exc
    config["module"]["lam"] = format_rational(lam)
    _require_int(config["module"]["depth"], "module.depth", 0)
    f = _parse_f(config["module"]["f"], "module.f")
    config["module"]["f"] = [[i, j, format_rational(c)] for (i, j), c in f.items()]

    if config["x"]["kind"] not in (None, "c1", "c2"):
        raise ConfigError(f"x.kind must be c1 or c2, got {config['x']['kind']!r}")
    if config["x"]["weight_cap"] is not None:
        _require_int(config["x"]["weight_cap"], "x.weight_cap", 0)

    if config["task"] not in TASKS:
        raise ConfigError(f"task must be one of {', '.join(TASKS)}")
    _require_int(config["seed"], "seed", 0)
    if not isinstance(config["out"], str) or not config["out"]:
        raise ConfigError("out must be a nonempty path")
    if not isinstance(config["cache"]["enabled"], bool):
        raise ConfigError("cache.enabled must be a boolean")

    v = config["verify"]
    _require_int(v["residue_window"], "verify.residue_window", 4)
    _require_int(v["index_range"], "verify.index_range", 0)
    _require_int(v["sample_limit"], "verify.sample_limit", 1)

    nm = config["normalize"]
    if nm["variant"] not in ("diff0", "diff1"):
        raise ConfigError("normalize.variant must be diff0 or diff1")
    if nm["ordering"] not in ("by-index", "by-degree"):
        raise ConfigError("normalize.ordering must be by-index or by-degree")
    if not isinstance(nm["expression"], list):
        raise ConfigError("normalize.expression must be a list of terms")
    _require_int(nm["budget"], "normalize.budget", 1)

    _require_int(config["spanning"]["n"], "spanning.n", 1)
    if config["spanning"]["depth_cap"] is not None:
        _require_int(config["spanning"]["depth_cap"], "spanning.depth_cap", 0)
    _require_int(config["cofiniteness"]["n_max"], "cofiniteness.n_max", 2)
    if config["cofiniteness"]["depth_cap"] is not None:
        _require_int(config["cofiniteness"]["depth_cap"],
                     "cofiniteness.depth_cap", 0)
    return config


def load_config(path: Optional[str]) -> Dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return raw


# ---------------------------------------------------------------------------
# deterministic serialization and the table cache


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_artifact(out_dir: str, name: str, obj) -> str:
    """Single serialization point for every artifact the CLI writes."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    text = obj if isinstance(obj, str) else _dump_json(obj)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _algebra_to_json(alg: AlgebraInstance) -> Dict:
    return {
        "name": alg.name,
        "cutoff": alg.cutoff,
        "vacuum_id": alg.vacuum_id,
        "basis": [[bid, w] for bid, w in alg.basis],
        "y_table": [
            [u, n, v, sorted((k, format_rational(c)) for k, c in vec.items())]
            for (u, n, v), vec in sorted(alg.y_table.items())
        ],
        "sl2": {
            str(j): [
                [bid, sorted((k, format_rational(c)) for k, c in vec.items())]
                for bid, vec in sorted(tab.items())
            ]
            for j, tab in sorted(alg.sl2.items())
        },
    }


def _algebra_from_json(obj: Dict) -> AlgebraInstance:
    return AlgebraInstance(
        name=obj["name"],
        cutoff=obj["cutoff"],
        vacuum_id=obj["vacuum_id"],
        basis=tuple((bid, w) for bid, w in obj["basis"]),
        y_table={
            (u, n, v): {k: as_rational(c) for k, c in vec}
            for u, n, v, vec in obj["y_table"]
        },
        sl2={
            int(j): {bid: {k: as_rational(c) for k, c in vec} for bid, vec in tab}
            for j, tab in obj["sl2"].items()
        },
    )


def _build_algebra_fresh(config: Dict) -> AlgebraInstance:
    if config["algebra"]["kind"] == "heisenberg":
        return build_heisenberg(config["algebra"]["cutoff"])
    return build_trivial_algebra(config["algebra"]["cutoff"])


def cache_tables(config: Dict) -> Tuple[AlgebraInstance, Dict]:
    """Build or load the algebra tables through the content-hashed cache.

    The cache file stores the serialized tables next to their hash; a load
    recomputes the hash and rebuilds on mismatch (warning on stderr).  Cache
    entries are keyed by algebra kind and cutoff, so different truncations
    live side by side.
    """
    kind = config["algebra"]["kind"]
    cutoff = config["algebra"]["cutoff"]
    cache_dir = config["cache"]["dir"] or os.path.join(config["out"], "cache")
    path = os.path.join(cache_dir, f"{kind}-cutoff{cutoff}.json")
    meta = {"path": path, "hit": False, "rebuilt": False}

    if os.path.exists(path):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                entry = json.load(fh)
            body = _dump_json(entry["tables"])
            digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
            if digest == entry["hash"]:
                meta["hit"] = True
                return _algebra_from_json(entry["tables"]), meta
            print(f"warning: cache hash mismatch at {path}, rebuilding",
                  file=sys.stderr)
            meta["rebuilt"] = True
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError):
            print(f"warning: unreadable cache entry at {path}, rebuilding",
                  file=sys.stderr)
            meta["rebuilt"] = True

    alg = _build_algebra_fresh(config)
    tables = _algebra_to_json(alg)
    body = _dump_json(tables)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    os.makedirs(cache_dir, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dump_json({"hash": digest, "tables": tables}))
    return alg, meta


def build_algebra(config: Dict) -> Tuple[AlgebraInstance, Dict]:
    if config["cache"]["enabled"]:
        return cache_tables(config)
    return _build_algebra_fresh(config), {"path": None, "hit": False,
                                          "rebuilt": False}


def build_module(config: Dict, alg: AlgebraInstance):
    f = _parse_f(config["module"]["f"], "module.f")
    if config["algebra"]["kind"] == "trivial":
        return build_adjoint_quasimodule(alg, f=f, validate=False)
    return build_fock_quasimodule(
        alg,
        as_rational(config["module"]["lam"]),
        f=f,
        depth_cap=config["module"]["depth"],
        validate=False,
    )


def build_x(config: Dict, alg: AlgebraInstance, default_kind: str):
    kind = config["x"]["kind"] or default_kind
    cap = config["x"]["weight_cap"]
    sub = c1_subspace(alg) if kind == "c1" else c_n_subspace(alg, 2)
    return quotient_representatives(alg, sub, weight_cap=cap), kind


# ---------------------------------------------------------------------------
# tasks


def run_verify(config: Dict) -> Tuple[int, Dict, List[str]]:
    alg, _ = build_algebra(config)
    axioms = check_axioms(alg)
    qm = build_module(config, alg)
    module_report = validate_quasimodule(
        qm, max_total_weight=min(alg.cutoff, 5))

    vconf = config["verify"]
    rng = random.Random(config["seed"])
    span = range(-vconf["index_range"], vconf["index_range"] + 1)
    combos = [
        (fi, m, n, which)
        for fi in range(len(DEFAULT_F_BATTERY))
        for m in span
        for n in span
        for which in ("assoc", "comm")
    ]
    if len(combos) > vconf["sample_limit"]:
        combos = rng.sample(combos, vconf["sample_limit"])
        combos.sort()
    instances = []
    matches = 0
    for fi, m, n, which in combos:
        f = _parse_f(DEFAULT_F_BATTERY[fi], "f battery")
        rep = verify_residue_derivation(f, m, n, vconf["residue_window"], which)
        instances.append(rep)
        if rep["status"] == "match":
            matches += 1

    passed = axioms.passed and module_report["passed"] and matches == len(instances)
    report = {
        "task": "verify",
        "axioms": axioms.to_json_obj(),
        "module_tables": module_report,
        "residue_instances": instances,
        "residue_matches": [matches, len(instances)],
        "passed": passed,
    }
    summary = [
        f"axioms: {'PASS' if axioms.passed else 'FAIL'} "
        f"({sum(axioms.counts.values())} checks)",
        f"module tables: {'PASS' if module_report['passed'] else 'FAIL'} "
        f"({sum(module_report['checks'].values())} checks)",
        f"residue identities: {matches}/{len(instances)} match",
    ]
    return (0 if passed else 1), report, summary


def run_normalize(config: Dict) -> Tuple[int, Dict, List[str]]:
    alg, _ = build_algebra(config)
    qm = build_module(config, alg)
    nconf = config["normalize"]
    variant = nconf["variant"]
    X, x_kind = build_x(config, alg, "c1" if variant == "diff0" else "c2")
    w = weight_zero_state(qm)
    cert = uniform_annihilation_order(qm, w, X)

    try:
        expr = expression_from_json(nconf["expression"], alg)
    except KeyError as exc:
        raise ConfigError(
            f"normalize.expression: unknown generator {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"normalize.expression: {exc}") from exc
    trace = NormalizationTrace()
    if variant == "diff0":
        out = normalize_diff0(expr, X, cert.order, qm, w,
                              ordering=nconf["ordering"],
                              budget=nconf["budget"], trace=trace)
    else:
        out = normalize_diff1(expr, X, cert.order, qm, w,
                              budget=nconf["budget"], trace=trace)

    evaluation: Dict = {"status": "skipped"}
    code = 0
    try:
        before = evaluate(expr, qm, w)
        after = evaluate(out, qm, w)
        equal = sorted((k, format_rational(c)) for k, c in before.items() if c)
        equal_after = sorted((k, format_rational(c)) for k, c in after.items() if c)
        evaluation = {
            "status": "equal" if equal == equal_after else "mismatch",
            "value": equal,
        }
        if equal != equal_after:
            code = 1
    except TruncationOverflow as exc:
        if config.get("strict_overflow"):
            raise
        evaluation = {"status": "overflow", "detail": str(exc)}

    report = {
        "task": "normalize",
        "variant": variant,
        "x_kind": x_kind,
        "certificate": cert.to_json_obj(),
        "input": nconf["expression"],
        "output": expression_to_json(out),
        "trace": {
            "steps": [[rule, pos, list(metric)] for rule, pos, metric in trace.steps],
            "budget_used": trace.budget_used,
            "input_hash": trace.input_hash,
            "output_hash": trace.output_hash,
        },
        "evaluation": evaluation,
        "passed": code == 0,
    }
    summary = [
        f"normalize {variant}: {len(expr.terms)} term(s) in, "
        f"{len(out.terms)} term(s) out",
        f"annihilation order T = {cert.order}",
        f"steps used: {trace.budget_used} of {nconf['budget']}",
        f"evaluation: {evaluation['status']}",
    ]
    return code, report, summary


def run_spanning(config: Dict) -> Tuple[int, Dict, List[str]]:
    alg, _ = build_algebra(config)
    qm = build_module(config, alg)
    X, x_kind = build_x(config, alg, "c2")
    w = weight_zero_state(qm)
    cert = uniform_annihilation_order(qm, w, X)
    code = 0 if verify_annihilation(qm, cert) else 1

    rep = module_cn_quotient(qm, w, X, cert.order,
                             config["spanning"]["n"],
                             depth_cap=config["spanning"]["depth_cap"])
    report = {
        "task": "spanning",
        "x_kind": x_kind,
        "certificate": cert.to_json_obj(),
        "quotient": rep,
        "passed": code == 0,
    }
    span = rep["spanning"]
    summary = [
        f"annihilation order T = {cert.order} "
        f"({'replayed' if code == 0 else 'REPLAY FAILED'})",
        f"subspace index n = {rep['subspace_index']}, "
        f"word length cap {span['max_word_length']}",
        f"words kept: {span['word_count']}, "
        f"span certified through depth {span['certified_depth']}",
        "quotient dims per depth: "
        + ", ".join(f"{d}:{v[2]}" for d, v in sorted(
            rep["dims"].items(), key=lambda kv: int(kv[0]))),
    ]
    return code, report, summary


def run_cofiniteness(config: Dict) -> Tuple[int, Dict, List[str]]:
    alg, _ = build_algebra(config)
    qm = build_module(config, alg)
    X, x_kind = build_x(config, alg, "c2")
    w = weight_zero_state(qm)
    cert = uniform_annihilation_order(qm, w, X)

    rep = cofinite_equivalence_check(qm, X, cert.order,
                                     config["cofiniteness"]["n_max"],
                                     depth_cap=config["cofiniteness"]["depth_cap"])
    agree = rep["verdicts_agree"]
    consistent = rep["observed_direction"] != "mixed"
    code = 0 if (agree and consistent) else 1
    report = {
        "task": "cofiniteness",
        "x_kind": x_kind,
        "certificate": cert.to_json_obj(),
        "equivalence": rep,
        "passed": code == 0,
    }
    summary = [
        f"subspace indices 2..{rep['n_max']} at depth cap {rep['depth_cap']}",
        f"containment direction: {rep['observed_direction']}",
        f"finiteness verdicts: {rep['verdicts']} "
        f"({'agree' if agree else 'DISAGREE'})",
    ]
    return code, report, summary


RUNNERS = {
    "verify": run_verify,
    "normalize": run_normalize,
    "spanning": run_spanning,
    "cofiniteness": run_cofiniteness,
}


def run(config: Dict) -> int:
    """Execute the configured task and write its artifacts; returns exit code."""
    task = config["task"]
    code, report, summary = RUNNERS[task](config)
    report["config"] = {k: v for k, v in config.items() if k != "strict_overflow"}
    report["seed"] = config["seed"]
    write_artifact(config["out"], f"{task}.json", report)
    status = "ok" if code == 0 else "invariant failure"
    lines = [f"task: {task}", f"status: {status}"] + summary
    write_artifact(config["out"], "summary.txt", "\n".join(lines) + "\n")
    for line in lines:
        print(line)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="quasispan",
        description="Exact identity verification, spanning-set normalization, "
                    "and cofiniteness reports for truncated quasimodules.",
    )
    parser.add_argument("--config", help="path to a JSON job config")
    parser.add_argument("--task", choices=TASKS, help="override the config task")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument("--strict-overflow", action="store_true",
                        help="treat depth-window overflow during artifact "
                             "evaluation as a failure instead of recording it")
    args = parser.parse_args(argv)

    try:
        raw = load_config(args.config)
        config = resolve_config(raw, overrides={
            "task": args.task, "seed": args.seed, "out": args.out,
        })
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    config["strict_overflow"] = bool(args.strict_overflow)

    try:
        return run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (MetricViolation, BudgetExceeded, AnnihilationViolation,
            TruncationOverflow, ValueError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
