"""Command-line front end.

Every output file carries the resolved config, as a ``#`` header in CSVs
or a ``"config"`` entry in JSON, so a run can be repeated from its output.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import find_peaks, fit_fano, fit_lorentzian, peak_window
from .config import PRESET_NAMES, RunConfig, load_config, load_config_file, preset_raw
from .errors import ConfigError, NoSwapDetected, ParameterError, UscError
from .hamiltonian import build_scattering_blocks
from .levels import find_anticrossing, sweep_levels
from .oracle import build_lattice, oracle_scatter
from .scattering import (POPULATION_KEYS, density_map, dressed_population_arrays, format_float,
                         narrowest_resonance, reflection_transmission, solve_amplitudes,
                         sweep_spectrum, zoom_window)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class _Run:
    """Shared state for one command invocation."""

    def __init__(self, cfg: RunConfig, args):
        self.cfg = cfg
        self.jobs = max(1, args.jobs)
        self.out_dir = cfg.out_dir if args.out is None else args.out
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.header = "config: " + cfg.dumps()

    def path(self, stem: str, variant: str, ext: str):
        name = f"{self.cfg.prefix}{stem}{'_' + variant if variant else ''}.{ext}"
        return self.out_dir / name

    def write_json(self, path, payload: dict):
        payload = {**payload, "config": self.cfg.raw}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _label(variant: str) -> str:
    return variant or "default"


def cmd_levels(run: _Run):
    block = run.cfg.block("levels")
    for v in run.cfg.runs:
        curves = sweep_levels(v.params, block["delta_range"], block["n_points"],
                              block["n_levels"], block["n_max"], run.cfg.counter_rotating,
                              run.jobs)
        path = run.path("levels", v.name, "csv")
        curves.to_csv(path, run.header)
        print(f"{_label(v.name)}: {len(curves.delta_grid)} points, n_max={curves.n_max} -> {path}")
        if block["anticrossing"]:
            a, b = block["anticrossing"]
            try:
                ac = find_anticrossing(curves, a, b).as_dict()
                ac["swap_detected"] = True
                print(f"  anticrossing {a}/{b}: delta*={ac['delta_star']:.6f} gap={ac['gap']:.6g}")
            except NoSwapDetected as exc:
                ac = {"delta_star": None, "gap": 0.0, "labels": [a, b], "swap_detected": False}
                print(f"  anticrossing {a}/{b}: none ({exc})")
            run.write_json(run.path("anticrossing", v.name, "json"), ac)


def cmd_scatter(run: _Run):
    block = run.cfg.block("scatter")
    peaks_cfg = block["peaks"]
    for v in run.cfg.runs:
        table = sweep_spectrum(v.params, block["omega_range"], block["n_points"],
                               block["refine_poles"], run.cfg.counter_rotating, run.jobs)
        path = run.path("spectrum", v.name, "csv")
        table.to_csv(path, run.header)
        ok = table.valid
        peaks = find_peaks(table.omega[ok], table.R[ok], peaks_cfg["min_height"],
                           peaks_cfg["min_prominence"])
        n_sing = int((~ok).sum())
        print(f"{_label(v.name)}: {len(table)} rows ({n_sing} singular) -> {path}")
        for om, r, prom in peaks:
            print(f"  peak omega={om:.6f} R={r:.6f} prominence={prom:.4f}")
        run.write_json(run.path("peaks", v.name, "json"), {
            "peaks": [{"omega": om, "R": r, "prominence": p} for om, r, p in peaks],
            "singular_omegas": [float(w) for w in table.omega[~ok]],
        })


def cmd_map(run: _Run):
    block = run.cfg.block("map")
    for v in run.cfg.runs:
        dm = density_map(v.params, block["omega_range"], block["delta_range"],
                         block["n_omega"], block["n_delta"], run.cfg.counter_rotating, run.jobs)
        path = run.path("map", v.name, "csv")
        dm.to_csv(path, run.header)
        run.write_json(run.path("map", v.name, "json"), {
            "layout": "delta-major: all omega values for each delta in turn",
            "n_omega": len(dm.omega),
            "n_delta": len(dm.delta),
            "omega_range": [float(dm.omega[0]), float(dm.omega[-1])],
            "delta_range": [float(dm.delta[0]), float(dm.delta[-1])],
            "singular_cells": int(dm.singular.sum()),
        })
        print(f"{_label(v.name)}: {dm.R.size} cells, max R={np.nanmax(dm.R):.4f} -> {path}")


def _write_populations(path, header, table, dressed_keys=None, dressed=None):
    with open(path, "w", newline="") as fh:
        for line in header.splitlines():
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        cols = ["omega"] + [f"pop_{k}" for k in POPULATION_KEYS]
        if dressed_keys:
            cols += [f"dressed_{k.replace(':', '_')}" for k in dressed_keys]
        w.writerow(cols + ["flags"])
        for i in range(len(table)):
            row = [format_float(table.omega[i])]
            row += [format_float(table.pops[k][i]) for k in POPULATION_KEYS]
            if dressed_keys:
                row += [format_float(x) for x in dressed[i]]
            w.writerow(row + [";".join(table.flags[i])])


def cmd_populations(run: _Run):
    block = run.cfg.block("populations")
    for v in run.cfg.runs:
        table = sweep_spectrum(v.params, block["omega_range"], block["n_points"],
                               block["refine_poles"], run.cfg.counter_rotating, run.jobs)
        keys = proj = None
        if block["mode"] == "dressed":
            H = build_scattering_blocks(v.params, run.cfg.counter_rotating)[0]
            keys, proj = dressed_population_arrays(table.u, H)
        path = run.path("populations", v.name, "csv")
        _write_populations(path, run.header, table, keys, proj)
        ok = table.valid
        top = max(POPULATION_KEYS, key=lambda k: np.nanmax(table.pops[k][ok]))
        print(f"{_label(v.name)}: {len(table)} rows -> {path}")
        print(f"  largest population: {top} "
              f"({np.nanmax(table.pops[top][ok]):.4f}), "
              f"max antisym {np.nanmax(table.pops['antisym'][ok]):.3g}")


def _fit_variant(params, block, cr):
    out = {}
    lo, hi = block["window"]
    if "fano_R" in block["targets"]:
        win = (lo, hi)
        if block["zoom_widths"]:
            pole = narrowest_resonance(params, win, cr)
            win = zoom_window(pole, block["zoom_widths"])
        table = sweep_spectrum(params, win, block["n_points"], False, cr)
        ok = table.valid
        fit = fit_fano(table.omega[ok], table.R[ok])
        out["fano_R"] = {**vars(fit), "window": list(win)}
    if "lorentzian_antisym" in block["targets"]:
        table = sweep_spectrum(params, (lo, hi), block["n_points"], True, cr)
        ok = table.valid
        om, pop = table.omega[ok], table.pops["antisym"][ok]
        win = peak_window(om, pop)
        sel = (om >= win[0]) & (om <= win[1])
        fit = fit_lorentzian(om[sel], pop[sel])
        out["lorentzian_antisym"] = {**vars(fit), "window": list(win),
                                     "peak_population": float(pop.max())}
    return out


def cmd_fit(run: _Run):
    block = run.cfg.block("fit")
    results = {}
    for v in run.cfg.runs:
        res = _fit_variant(v.params, block, run.cfg.counter_rotating)
        results[v.name] = res
        run.write_json(run.path("fit", v.name, "json"), res)
        parts = []
        if "fano_R" in res:
            f = res["fano_R"]
            parts.append(f"Fano omega0={f['omega0']:.6f} q={f['q']:.3f} width={f['width']:.3g}")
        if "lorentzian_antisym" in res:
            f = res["lorentzian_antisym"]
            parts.append(f"antisym Lorentzian center={f['center']:.6f} "
                         f"peak={f['peak_population']:.4f}")
        print(f"{_label(v.name)}: " + "; ".join(parts))


def cmd_oracle(run: _Run):
    block = run.cfg.block("oracle")
    cr = run.cfg.counter_rotating
    tasks = [(v, w) for v in run.cfg.runs for w in block["omegas"]]

    def one(task):
        v, w = task
        model = build_lattice(v.params, w, block["n_sites"], block["hopping"],
                              block["spectral_width"], cr)
        res = oracle_scatter(model, dt=block["dt"], max_residual=block["max_residual"])
        R, T = reflection_transmission(solve_amplitudes(v.params, w, cr))
        return v, w, res, float(R), float(T)

    if run.jobs > 1:
        with ThreadPoolExecutor(run.jobs) as ex:
            results = list(ex.map(one, tasks))
    else:
        results = [one(t) for t in tasks]
    for v, w, res, R, T in results:
        payload = res.as_dict()
        payload["closed_form"] = {"R": R, "T": T}
        payload["abs_diff"] = {"R": abs(res.R - R), "T": abs(res.T - T)}
        run.write_json(run.path("oracle", f"{v.name}_w{w:g}" if v.name else f"w{w:g}", "json"),
                       payload)
        print(f"{_label(v.name)} omega={w:g}: lattice R={res.R:.6f} T={res.T:.6f} "
              f"residual={res.residual:.2g} | closed form R={R:.6f} T={T:.6f}")


COMMANDS = {
    "levels": (cmd_levels, "levels"),
    "scatter": (cmd_scatter, "scatter"),
    "map": (cmd_map, "map"),
    "populations": (cmd_populations, "populations"),
    "fit": (cmd_fit, "fit"),
    "oracle": (cmd_oracle, "oracle"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="uscwg",
        description="Single-photon scattering off two ultrastrongly coupled qubits in a waveguide.")
    p.add_argument("command", choices=sorted(COMMANDS))
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="JSON run configuration")
    src.add_argument("--preset", choices=PRESET_NAMES, help="shipped configuration")
    p.add_argument("--rwa", action="store_true", help="drop counter-rotating terms")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--points", type=int, default=None, help="override the grid size")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")
    return p


def _apply_overrides(raw: dict, command: str, args) -> dict:
    raw = json.loads(json.dumps(raw))
    if args.rwa:
        raw["counter_rotating"] = False
    if args.points is not None:
        block = raw.get(COMMANDS[command][1])
        if block is None:
            raise ConfigError(f"config has no '{command}' block")
        if command == "map":
            block["n_omega"] = args.points
        elif command != "oracle":
            block["n_points"] = args.points
    return raw


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    func, block = COMMANDS[args.command]
    try:
        if args.preset:
            raw = preset_raw(args.preset)
        else:
            raw = load_config_file(args.config).raw
        cfg = load_config(_apply_overrides(raw, args.command, args))
        cfg.block(block)
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        func(_Run(cfg, args))
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UscError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
