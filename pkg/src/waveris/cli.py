"""Command-line front end: ``waveris {model,optimize,sweep}``.

Scenarios are flat ``key = value`` files (``#`` comments). Frequencies,
lengths and times take unit suffixes (``3 GHz``, ``19 mm``, ``100 ns``);
bare numbers are SI. Angles are degrees, voltages volts. Unknown keys are
rejected. Run ``waveris keys`` for the schema.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .beamform import ArrayScenario, SLNREvaluator, db, radiation_pattern
from .biasline import BiasLineGeometry, EnvelopeDetector, SampleAndHold, validate_range
from .errors import ConfigError, RepairError, SampleTimeError
from .metasurface import UnitCellCircuit, build_phase_voltage_map, phase_span, reflection_coefficient, voltage_grid
from .optimize import (FIRST_N, STRONGEST_N, BruteForceConfig, NullSteerConfig, SAConfig, arbitrary_null_state,
                       brute_force, combined, ls_fit, null_steer, sa_init, simulated_annealing, slnr_sweep,
                       weight_ranking, wls_fit)
from .varactor import V_MAX, V_MIN, load_varactor_table

SPEED_OF_LIGHT = 299792458.0
EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

ALGORITHMS = ("ideal", "arbitrary", "envelope-wr-bf", "sh-ls", "sh-wls", "sa", "combined")
SAMPLERS = ("sample-hold", "envelope")
_NEEDS_SAMPLER = {"envelope-wr-bf": "envelope", "sh-ls": "sample-hold", "sh-wls": "sample-hold",
                  "combined": "sample-hold"}

_UNITS = {
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9},
}


# ------------------------------------------------------------------ parsing


def _quantity(kind):
    units = _UNITS[kind]

    def parse(text):
        text = text.strip()
        for suffix in sorted(units, key=len, reverse=True):
            if text.endswith(suffix):
                head = text[: -len(suffix)].strip()
                if head and (head[-1].isdigit() or head[-1] == "."):
                    return float(head) * units[suffix]
        return float(text)
    return parse


def _listof(item):
    def parse(text):
        return tuple(item(x) for x in text.split(",") if x.strip())
    return parse


def _choice(*options):
    def parse(text):
        text = text.strip()
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _optional(item):
    def parse(text):
        return None if text.strip().lower() in ("", "none", "auto") else item(text)
    return parse


def _int(text):
    return int(text.strip())


def _float(text):
    return float(text.strip())


_FREQ, _LEN, _TIME = _quantity("frequency"), _quantity("length"), _quantity("time")

# key -> (parser, default, help)
SCHEMA = {
    "f_c": (_FREQ, 3e9, "carrier frequency"),
    "d_x": (_LEN, 0.019, "element pitch; Delta = d_x f_c / c"),
    "delta": (_optional(_float), None, "element pitch in wavelengths (overrides d_x)"),
    "M": (_int, 100, "number of elements"),
    "N": (_int, 50, "number of standing-wave modes"),
    "M_l": (_float, 2.0, "line extension left of element 0, in pitches"),
    "M_r": (_float, 2.0, "line extension right of element M-1, in pitches"),
    "f_b": (_FREQ, 12.9e6, "standing-wave fundamental frequency"),
    "sampler": (_choice(*SAMPLERS), "sample-hold", "bias sampler"),
    "t0": (_optional(_TIME), None, "sample-and-hold instant (default 8/omega_b)"),
    "rho_s": (_float, 1.0, "symbol power"),
    "noise": (_float, 1.0, "noise power"),
    "desired": (_listof(_float), (-30.0,), "beam directions, degrees"),
    "undesired": (_listof(_float), (), "null directions, degrees"),
    "algorithm": (_choice(*ALGORITHMS), "sh-wls", "optimize pipeline"),
    "mode_index": (_choice("printed", "appendix"), "printed", "mode-index formula for SA start"),
    "frequencies": (_listof(_FREQ), tuple(np.round(np.arange(2.6, 3.0001, 0.05), 2) * 1e9),
                    "model sweep frequencies"),
    "pattern_step": (_float, 0.25, "pattern grid step, degrees"),
    "bf_initial_step": (_float, 1.0, "brute force initial step, volts"),
    "bf_step_floor": (_float, 0.001, "brute force final step, volts"),
    "sa_lambda": (_float, 0.03, "annealing perturbation scale"),
    "sa_k_c": (_float, 0.002, "annealing cooling factor"),
    "sa_i_max": (_int, 2000, "annealing iterations"),
    "sa_patience": (_int, 100, "iterations without improvement before reverting"),
    "null_threshold": (_float, 1e-4, "null steering tolerance"),
    "null_max_iters": (_int, 10_000, "null steering pass cap"),
    "seed": (_int, 0, "random seed"),
    "sweep_M": (_listof(_int), (50, 100, 150, 200, 256), "sweep element counts"),
    "sweep_N": (_listof(_int), (10, 25, 50), "sweep mode counts"),
    "sweep_selection": (_choice(FIRST_N, STRONGEST_N), FIRST_N, "modes kept in the sweep"),
    "sweep_trials": (_int, 10, "trials per sweep cell"),
}


@dataclass
class ScenarioConfig:
    values: dict = field(default_factory=lambda: {k: v[1] for k, v in SCHEMA.items()})

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def spacing(self) -> float:
        return self.delta if self.delta is not None else self.d_x * self.f_c / SPEED_OF_LIGHT

    def geometry(self, M=None, N=None) -> BiasLineGeometry:
        return BiasLineGeometry(M or self.M, N or self.N, self.M_l, self.M_r, self.d_x, self.f_b)

    def scenario(self) -> ArrayScenario:
        return ArrayScenario.from_degrees(self.M, self.spacing, self.desired, self.undesired,
                                          rho_s=self.rho_s, noise=self.noise)

    def sample_time(self) -> float:
        return self.t0 if self.t0 is not None else self.geometry().default_sample_time()

    def sampler_obj(self):
        return SampleAndHold(self.sample_time()) if self.sampler == "sample-hold" else EnvelopeDetector()

    def sa_config(self, seed=None) -> SAConfig:
        return SAConfig(self.sa_lambda, self.sa_k_c, self.sa_i_max, self.sa_patience,
                        self.seed if seed is None else seed)

    def null_config(self) -> NullSteerConfig:
        return NullSteerConfig(self.null_threshold, self.null_max_iters)

    def as_dict(self) -> dict:
        out = {}
        for k, v in self.values.items():
            out[k] = list(v) if isinstance(v, tuple) else v
        return out


def parse_config(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                       comment_prefixes=("#",), delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string("[scenario]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    cfg = ScenarioConfig()
    for key, raw in parser["scenario"].items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            cfg.values[key] = SCHEMA[key][0](raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {raw!r} ({exc})") from exc
    validate_config(cfg)
    return cfg


def load_config(path) -> ScenarioConfig:
    if path is None:
        cfg = ScenarioConfig()
        validate_config(cfg)
        return cfg
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _require(cond, key, msg):
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def validate_config(cfg: ScenarioConfig):
    _require(cfg.f_c > 0, "f_c", "must be positive")
    _require(cfg.d_x > 0, "d_x", "must be positive")
    _require(cfg.delta is None or cfg.delta > 0, "delta", "must be positive")
    _require(cfg.M >= 2, "M", "need at least two elements")
    _require(cfg.N >= 1, "N", "need at least one mode")
    _require(cfg.M_l >= 0 and cfg.M_r >= 0, "M_l/M_r", "must be nonnegative")
    _require(cfg.f_b > 0, "f_b", "must be positive")
    _require(cfg.t0 is None or cfg.t0 > 0, "t0", "must be positive")
    _require(cfg.rho_s > 0, "rho_s", "must be positive")
    _require(cfg.noise >= 0, "noise", "must be nonnegative")
    _require(len(cfg.desired) >= 1, "desired", "need at least one beam direction")
    for key in ("desired", "undesired"):
        _require(all(abs(a) < 90 for a in getattr(cfg, key)), key, "angles must lie in (-90, 90) degrees")
    _require(len(cfg.frequencies) >= 1, "frequencies", "empty frequency list")
    _require(all(f > 0 for f in cfg.frequencies), "frequencies", "must be positive")
    _require(cfg.pattern_step > 0, "pattern_step", "must be positive")
    _require(0 < cfg.bf_step_floor < cfg.bf_initial_step, "bf_step_floor", "need 0 < bf_step_floor < bf_initial_step")
    _require(cfg.sa_lambda >= 0, "sa_lambda", "must be nonnegative")
    _require(cfg.sa_k_c > 0, "sa_k_c", "must be positive")
    _require(cfg.sa_i_max >= 1, "sa_i_max", "must be at least 1")
    _require(cfg.sa_patience >= 1, "sa_patience", "must be at least 1")
    _require(cfg.null_threshold > 0, "null_threshold", "must be positive")
    _require(cfg.null_max_iters >= 1, "null_max_iters", "must be at least 1")
    _require(cfg.seed >= 0, "seed", "must be nonnegative")
    _require(len(cfg.sweep_M) >= 1, "sweep_M", "empty list")
    _require(len(cfg.sweep_N) >= 1, "sweep_N", "empty list")
    _require(all(m >= 2 for m in cfg.sweep_M), "sweep_M", "need at least two elements")
    _require(all(n >= 1 for n in cfg.sweep_N), "sweep_N", "need at least one mode")
    _require(cfg.sweep_trials >= 1, "sweep_trials", "must be at least 1")
    need = _NEEDS_SAMPLER.get(cfg.algorithm)
    _require(need is None or cfg.sampler == need, "algorithm",
             f"{cfg.algorithm} requires sampler = {need}, got {cfg.sampler}")
    if cfg.algorithm == "envelope-wr-bf":
        _require(len(cfg.desired) == 1 and not cfg.undesired, "algorithm",
                 "envelope-wr-bf steers a single beam without nulls")
    try:
        cfg.geometry()
        cfg.scenario()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.sampler == "sample-hold":
        try:
            cfg.sampler_obj().check(cfg.geometry())
        except SampleTimeError as exc:
            raise ConfigError(f"t0: {exc}") from exc


# ------------------------------------------------------------------ output


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    _atomic_write(Path(path), format_csv(header, rows))


def _parse_cell(text):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def read_csv(path):
    """``(header, rows)`` with numeric cells converted back to int/float."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [[_parse_cell(c) for c in row] for row in reader]


def write_json(path, data):
    _atomic_write(Path(path), json.dumps(data, indent=2, sort_keys=True) + "\n")


# ----------------------------------------------------------------- commands


def _phase_map(cfg):
    return build_phase_voltage_map(UnitCellCircuit(), load_varactor_table(), cfg.f_c)


def cmd_model(cfg: ScenarioConfig, out: Path) -> dict:
    circuit, table = UnitCellCircuit(), load_varactor_table()
    v = voltage_grid(table)
    rows = []
    for f in cfg.frequencies:
        phi = reflection_coefficient(circuit, table, v, f)
        phase = np.degrees(np.unwrap(np.angle(phi)))
        for vi, mag, ph in zip(v, np.abs(phi), phase):
            rows.append((f / 1e9, float(vi), float(mag), float(ph)))
    write_csv(out / "reflection.csv", ["f_GHz", "V_volts", "mag", "phase_deg"], rows)
    spans = np.degrees(phase_span(circuit, table, np.array(cfg.frequencies)))
    k = int(np.argmax(spans))
    summary = {
        "command": "model",
        "frequencies_GHz": [f / 1e9 for f in cfg.frequencies],
        "phase_span_deg": [float(s) for s in spans],
        "max_phase_span_deg": float(spans[k]),
        "max_span_frequency_GHz": cfg.frequencies[k] / 1e9,
        "voltage_points": int(v.size),
    }
    write_json(out / "model_summary.json", summary)
    return summary


def _state_metrics(scn, phi, desired_deg, undesired_deg):
    evaluate = SLNREvaluator(scn)
    pd, pe = evaluate.powers(phi)
    return {
        "slnr_dB": evaluate(phi),
        "gain_dB": {repr(float(a)): float(db(p)) for a, p in zip(desired_deg, pd)},
        "snr_dB": {repr(float(a)): float(db(p / scn.noise)) if scn.noise > 0 else float("inf")
                   for a, p in zip(desired_deg, pd)},
        "leakage_dB": {repr(float(a)): float(db(p)) if p > 0 else float("-inf")
                       for a, p in zip(undesired_deg, pe)},
    }


def run_optimize(cfg: ScenarioConfig):
    """Execute the configured pipeline; returns ``(report, phi, voltages, weights)``."""
    scn, g, pmap = cfg.scenario(), cfg.geometry(), _phase_map(cfg)
    stages, weights, voltages, violations, converged = [], None, None, [], True
    algo = cfg.algorithm

    def stage(name, phi):
        stages.append({"stage": name, **_state_metrics(scn, phi, cfg.desired, cfg.undesired)})

    if algo == "ideal":
        res = null_steer(scn, cfg.null_config())
        phi, converged = res.phi, res.converged
        stage("ideal", phi)
    elif algo in ("arbitrary", "sh-ls", "sh-wls", "combined"):
        ideal, snapped, V, phi_arb = arbitrary_null_state(scn, pmap, cfg.null_config())
        converged = ideal.converged and snapped.converged
        stage("ideal", ideal.phi)
        stage("arbitrary", phi_arb)
        phi, voltages = phi_arb, V
        t0 = cfg.sample_time()
        if algo == "sh-ls":
            weights = ls_fit(g, V, t0)
            raw = SampleAndHold(t0).sample(g, weights)
            violations = [{"element": i, "excess_V": x} for i, x in validate_range(raw)]
            voltages = np.clip(raw, V_MIN, V_MAX)
            phi = pmap.coefficient(voltages)
            stage("sh-ls", phi)
        elif algo == "sh-wls":
            fit = wls_fit(g, pmap, V, t0)
            weights, voltages = fit.weights, fit.voltages
            violations = [{"element": i, "excess_V": x} for i, x in fit.repairs]
            phi = pmap.coefficient(voltages)
            stage("sh-wls", phi)
        elif algo == "combined":
            res = combined(g, scn, pmap, t0, cfg.sa_config(), cfg.null_config(),
                           arbitrary=(ideal, snapped, V, phi_arb))
            weights, voltages, phi = res.weights, res.voltages, res.phi
            violations = [{"element": i, "excess_V": x} for i, x in res.repairs]
            stage("wls", pmap.coefficient(wls_fit(g, pmap, V, t0).voltages))
            stage("sa", phi)
    elif algo == "envelope-wr-bf":
        theta = scn.desired[0]
        rank = weight_ranking(g, scn, theta, pmap)
        res = brute_force(g, scn, theta, rank.order, pmap,
                          BruteForceConfig(cfg.bf_initial_step, cfg.bf_step_floor))
        weights, voltages = res.weights, res.voltages
        phi = pmap.coefficient(voltages)
        stage("envelope-wr-bf", phi)
    elif algo == "sa":
        sampler = cfg.sampler_obj()
        init = sa_init(g, scn, sampler, cfg.mode_index)
        stage("sa-init", pmap.coefficient(sampler.sample(g, init)))
        res = simulated_annealing(g, scn, sampler, init, pmap, cfg.sa_config())
        weights, voltages = res.weights, res.voltages
        phi = pmap.coefficient(voltages)
        stage("sa", phi)
    else:  # pragma: no cover - rejected at load
        raise ConfigError(f"algorithm: unknown {algo!r}")

    report = {
        "command": "optimize",
        "algorithm": algo,
        "config": cfg.as_dict(),
        "delta": cfg.spacing,
        "stages": stages,
        "final": _state_metrics(scn, phi, cfg.desired, cfg.undesired),
        "null_converged": converged,
        "weights": None if weights is None else weights.to_dict(),
        "voltages": None if voltages is None else [float(x) for x in voltages],
        "violations": violations,
    }
    return report, phi, voltages, weights


def cmd_optimize(cfg: ScenarioConfig, out: Path) -> dict:
    report, phi, voltages, weights = run_optimize(cfg)
    scn = cfg.scenario()
    grid = np.radians(np.arange(-90.0, 90.0 + 1e-9, cfg.pattern_step))
    theta, gain = radiation_pattern(scn, phi, grid)
    write_csv(out / "pattern.csv", ["theta_deg", "gain_dB"],
              zip(np.degrees(theta).round(9), gain))
    write_json(out / "pattern.json", {
        "algorithm": cfg.algorithm, "M": cfg.M, "delta": cfg.spacing,
        "reference": "10*log10(rho_s*|h^T diag(phi) g|^2)", "floor_dB_below_peak": 100.0,
        "desired_deg": list(cfg.desired), "undesired_deg": list(cfg.undesired),
    })
    if voltages is not None:
        write_csv(out / "voltages.csv", ["m", "V_volts"], zip(range(cfg.M), voltages))
    if weights is not None:
        write_json(out / "weights.json", weights.to_dict())
    write_json(out / "report.json", report)
    return report


def cmd_sweep(cfg: ScenarioConfig, out: Path, threads: int = 1) -> list:
    rows = slnr_sweep(cfg.geometry(), cfg.scenario(), _phase_map(cfg), cfg.sweep_M, cfg.sweep_N,
                      cfg.sweep_selection, cfg.sweep_trials, cfg.seed, cfg.t0, cfg.sa_config(),
                      cfg.null_config(), workers=threads)
    write_csv(out / "sweep.csv", ["M", "N", "selection", "mean_slnr_dB", "std_dB", "trials"],
              [(r.M, r.N, r.selection, r.mean_slnr_db, r.std_db, r.trials) for r in rows])
    seen = {}
    for r in rows:
        seen.setdefault(r.M, (r.ideal_slnr_db, r.arbitrary_slnr_db))
    write_csv(out / "sweep_reference.csv", ["M", "ideal_slnr_dB", "arbitrary_slnr_dB"],
              [(M, *v) for M, v in seen.items()])
    return rows


# --------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="waveris", description="Standing-wave RIS modelling and optimisation.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("model", "reflection coefficient sweep"),
                           ("optimize", "run one optimisation pipeline"),
                           ("sweep", "SLNR over an (M, N) grid")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", help="scenario file (key = value)")
        s.add_argument("--seed", type=int, help="override the config seed")
        s.add_argument("--out", default="out", help="output directory (default: out)")
        s.add_argument("--threads", type=int, default=1, help="sweep worker processes")
    sub.add_parser("keys", help="list config keys and defaults")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    if args.command == "keys":
        for key, (_, default, helptext) in SCHEMA.items():
            print(f"{key:16s} {default!r:28s} {helptext}")
        return EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed: must be nonnegative")
            cfg.values["seed"] = args.seed
        if args.threads < 1:
            raise ConfigError("threads: must be at least 1")
        # catches phase maps that are not one-to-one at f_c
        if args.command != "model":
            _phase_map(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out = Path(args.out)
    try:
        if args.command == "model":
            s = cmd_model(cfg, out)
            print(f"max phase span {s['max_phase_span_deg']:.2f} deg at {s['max_span_frequency_GHz']:.4g} GHz")
        elif args.command == "optimize":
            report = cmd_optimize(cfg, out)
            final = report["final"]
            for angle, gain in final["gain_dB"].items():
                print(f"gain at {angle} deg: {gain:.4f} dB")
            print(f"SLNR: {final['slnr_dB']:.4f} dB")
            if not report["null_converged"]:
                print("error: null steering did not converge; outputs hold the best iterate", file=sys.stderr)
                return EXIT_RUNTIME
        else:
            for r in cmd_sweep(cfg, out, args.threads):
                print(f"M={r.M} N={r.N} {r.selection}: {r.mean_slnr_db:.3f} +/- {r.std_db:.3f} dB")
    except RepairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - surface any failure as a runtime exit
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
