"""
Command line front end

Usage::

    locapart run scenario.cfg
    locapart plot runs/h2/timeseries.csv
    locapart presets

Exit status is 0 on success, 2 for an invalid scenario or input table,
3 for a numerical failure and 4 for an I/O error.

Interface Functions:
    main
    run
    emit_plot_script
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict

import numpy as np

import locapart
from locapart.chem import basis as basismod
from locapart.chem import integrals as intmod
from locapart.chem import manybody as mbmod
from locapart.chem import partition as partmod
from locapart.chem import subsystem as submod
from locapart.chem.grid import TIERS, tier
from locapart.parsing import config as cfgmod
from locapart.parsing import csvdata
from locapart.transfer import decoherence as decmod
from locapart.transfer import dynamics as dynmod
from locapart.transfer import scenario

_log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_NUMERIC_ERRORS = (
    basismod.Error, intmod.Error, partmod.Error, mbmod.Error, submod.Error,
    dynmod.Error, decmod.Error, np.linalg.LinAlgError, ValueError,
)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _write_manifest(outdir, manifest):
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fout:
        json.dump(_jsonable(manifest), fout, indent=2, sort_keys=True)
        fout.write("\n")
    _log.info("wrote %s", path)


def _system_manifest(system):
    return {
        "nuclear_repulsion": system.tables.enuc,
        "nuclear_shares": system.nuclear_shares,
        "n_basis": len(system.basis),
        "space_dim": system.space.dim,
    }


def _run_dynamics(config, outdir, manifest):
    system = scenario.system_of(config)
    state = scenario.initial_state(system, config.state, config.manybody["coupling"])
    series = scenario.run_dynamics(
        system, state,
        config.time.get("samples", dynmod.DEFAULT_SAMPLES),
        config.time.get("t_max"),
        config.time.get("periods", dynmod.DEFAULT_PERIODS))
    path = os.path.join(outdir, "timeseries.csv")
    csvdata.write_series(path, series)
    emit_plot_script([path], os.path.join(outdir, "plot_timeseries.py"))
    manifest.update(_system_manifest(system))
    manifest["flavors"] = series.metadata["flavors"]
    manifest["projection_loss"] = state.loss
    manifest["averages"] = series.averages()
    return [path]


def _run_decoherence(config, outdir, manifest):
    series, terms = scenario.run_decoherence(config)
    path = os.path.join(outdir, "decoherence.csv")
    csvdata.write_series(path, series)
    emit_plot_script([path], os.path.join(outdir, "plot_decoherence.py"))
    manifest["flavors"] = ["symmetrized", "population"]
    manifest["decoherence"] = series.metadata
    manifest["site_terms"] = {label: asdict(t) for label, t in terms.items()}
    return [path]


def _run_limits(config, outdir, manifest):
    couplings, rows = scenario.run_limits(config)
    cols = {name: [] for name in (
        "R", "J", "K", "V_coul", "J_dd", "orientation", "max_overlap",
        "E_A", "E_B", "E_A_pred", "E_B_pred", "split_A")}
    for sep, report, predicted, measured, split in couplings:
        cols["R"].append(sep)
        cols["J"].append(report.J_transfer)
        cols["K"].append(report.K[1, 0, 0, 1])
        cols["V_coul"].append(report.V_coul[1, 0, 0, 1])
        cols["J_dd"].append(report.J_dd)
        cols["orientation"].append(report.orientation)
        cols["max_overlap"].append(report.max_overlap)
        cols["E_A"].append(measured[0])
        cols["E_B"].append(measured[1])
        cols["E_A_pred"].append(predicted[0])
        cols["E_B_pred"].append(predicted[1])
        cols["split_A"].append(split)
    cpath = os.path.join(outdir, "couplings.csv")
    csvdata.write_table(cpath, cols)

    lcols = {
        "R": [r.separation for r in rows],
        "E_A": [r.E_A for r in rows],
        "E_B": [r.E_B for r in rows],
        "share_A": [r.share_A for r in rows],
        "E_A_total": [r.E_A_total for r in rows],
        "isolated_A": [r.isolated_A for r in rows],
        "TV_AA": [r.TV_AA for r in rows],
        "half_V_AB": [r.half_V_AB for r in rows],
    }
    lpath = os.path.join(outdir, "limits.csv")
    csvdata.write_table(lpath, lcols)
    manifest["flavors"] = ["symmetrized"]
    manifest["coupling"] = "triplet"
    return [cpath, lpath]


def _run_naive(config, outdir, manifest):
    system = scenario.system_of(config)
    coupling = "triplet" if config.manybody["coupling"] == "triplet" else "product"
    report, local = scenario.run_naive(system, coupling)
    labels = system.partition.labels
    cols = {
        "R": float(np.linalg.norm(system.molecule.coords[1] - system.molecule.coords[0])),
        "E_A_naive": report.E_A,
        "E_B_naive": report.E_B,
        "V_AB_naive": report.V_AB,
        "total_naive": report.total,
        "true_total": report.true_total,
        "E_A_local": local[labels[0]],
        "E_B_local": local[labels[1]],
        "share_A": system.nuclear_shares[labels[0]],
        "share_B": system.nuclear_shares[labels[1]],
        "limit_A": report.limit_A,
        "limit_B": report.limit_B,
        "limit_AB": report.limit_AB,
        "tail_A": report.tail_A,
        "tail_B": report.tail_B,
        "tail_AB": report.tail_AB,
    }
    path = os.path.join(outdir, "naive.csv")
    csvdata.write_table(path, cols)
    manifest.update(_system_manifest(system))
    manifest["flavors"] = ["symmetrized"]
    manifest["coupling"] = coupling
    return [path]


def _run_integrals(config, outdir, manifest):
    system = scenario.system_of(config)
    extra = {}
    for label in system.partition.labels:
        tables = system.parts[label]
        extra[f"S_{label}"] = tables.S
        extra[f"h_{label}"] = tables.h
    path = os.path.join(outdir, "integrals.txt")
    intmod.dump_tables(system.tables, path, extra)
    _log.info("wrote %s", path)
    manifest.update({
        "nuclear_repulsion": system.tables.enuc,
        "nuclear_shares": system.nuclear_shares,
        "n_basis": len(system.basis),
    })
    return [path]


_RUNNERS = {
    "dynamics": _run_dynamics,
    "decoherence": _run_decoherence,
    "limits": _run_limits,
    "naive_demo": _run_naive,
    "integrals_only": _run_integrals,
}


def run(path, output=None):
    """Run the scenario file at *path* and write its outputs.

    Parameters
    ----------
    path : str
    output : str, optional
        Output directory; overrides the scenario's ``output`` key.

    Returns
    -------
    (ScenarioConfig, list)
        The scenario and the written file paths, manifest last.
    """
    config, digest = cfgmod.load_config(path)
    outdir = output or config.output
    os.makedirs(outdir, exist_ok=True)
    grid = tier(config.grid)
    manifest = {
        "version": locapart.__version__,
        "config_hash": digest,
        "scenario": config.to_dict(),
        "tau_grid": grid.tau,
        "tau_grid_2e": grid.tau_2e,
        "grid_tier": config.tier_name,
        "coupling": config.manybody.get("coupling"),
        "seed": config.seed,
    }
    written = _RUNNERS[config.mode](config, outdir, manifest)
    manifest["outputs"] = [os.path.basename(p) for p in written]
    _write_manifest(outdir, manifest)
    written.append(os.path.join(outdir, "manifest.json"))
    return config, written


_PLOT_TEMPLATE = '''\
"""Plot site populations (top) and energies (bottom) over time."""

import matplotlib.pyplot as plt
import numpy as np

FILES = {files!r}


def load(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def draw(ax_pop, ax_energy, data, title):
    names = data.dtype.names
    t = data["t_au"]
    for name in names:
        if name.startswith("N_"):
            line, = ax_pop.plot(t, data[name], label=name)
            ax_pop.axhline(data[name].mean(), color=line.get_color(), ls=":")
        elif name.startswith("ens_N_"):
            ax_pop.plot(t, data[name], label=name, lw=0.8)
        elif name.startswith("E_") and name != "E_total":
            line, = ax_energy.plot(t, data[name], label=name)
            ax_energy.axhline(data[name].mean(), color=line.get_color(), ls=":")
        elif name.startswith("ens_E_") and not name.endswith("_se"):
            ax_energy.plot(t, data[name], label=name, lw=0.8)
    if "ens_envelope" in names and "ens_E_A" in names:
        center = data["ens_E_A"].mean()
        amp = 0.5 * (data["E_A"].max() - data["E_A"].min())
        ax_energy.plot(t, center + amp * data["ens_envelope"], "k--",
                       lw=0.8, label="envelope")
    ax_pop.set_title(title)
    ax_pop.set_ylabel("population")
    ax_energy.set_ylabel("energy (hartree)")
    ax_energy.set_xlabel("time (au)")
    ax_pop.legend(fontsize="small")
    ax_energy.legend(fontsize="small")


def main():
    ncols = 1 if len(FILES) == 1 else 2
    nrows = (len(FILES) + ncols - 1) // ncols
    fig, axes = plt.subplots(2 * nrows, ncols, sharex="col", squeeze=False,
                             figsize=(6 * ncols, 5 * nrows))
    for k, path in enumerate(FILES):
        row, col = divmod(k, ncols)
        draw(axes[2 * row, col], axes[2 * row + 1, col], load(path), path)
    for k in range(len(FILES), nrows * ncols):
        row, col = divmod(k, ncols)
        axes[2 * row, col].axis("off")
        axes[2 * row + 1, col].axis("off")
    fig.tight_layout()
    plt.show()


if __name__ == "__main__":
    main()
'''


def emit_plot_script(csv_paths, path):
    """Write a matplotlib script that plots one or more time series.

    One table gives a population panel above an energy panel;
    several tables give a grid of such pairs, two per row.

    Raises
    ------
    csvdata.Error
        A table is malformed, empty or has no time column.
    """
    csv_paths = list(csv_paths)
    if not csv_paths:
        raise csvdata.Error("expected at least one table")
    for csv_path in csv_paths:
        cols = csvdata.read_table(csv_path)
        if "t_au" not in cols:
            raise csvdata.Error(f"{csv_path}: missing column t_au")
    files = [os.path.abspath(p) for p in csv_paths]
    with open(path, "w", encoding="utf-8") as fout:
        fout.write(_PLOT_TEMPLATE.format(files=files))
    _log.info("wrote %s", path)
    return path


def _presets():
    lines = ["modes:"]
    lines += [f"  {mode}" for mode in cfgmod.MODES]
    lines.append("geometry presets:")
    lines += [f"  {name}" for name in cfgmod.GEOMETRY_PRESETS]
    lines.append("state presets:")
    lines += [f"  {name:12s} {desc}" for name, desc in cfgmod.STATE_PRESETS.items()]
    lines.append("basis sets:")
    lines += [f"  {name}" for name in basismod.REGISTRY]
    lines.append("grid tiers:")
    lines += [f"  {name:8s} tau = {t.tau:.0e}, tau_2e = {t.tau_2e:.0e}"
              for name, t in TIERS.items()]
    return "\n".join(lines)


def parse_args(argv=None):
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog="locapart",
        description="Localized subsystem energies of electronic energy transfer.")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="log INFO (-v) or DEBUG (-vv) messages")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {locapart.__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("config", help="scenario file")
    p_run.add_argument("-o", "--output", default=None,
                       help="output directory [default: the scenario's output key]")

    p_plot = sub.add_parser("plot", help="write a plot script for time series")
    p_plot.add_argument("csv", nargs="+", help="time series tables")
    p_plot.add_argument("-o", "--output", default=None,
                        help="script path [default: plot_<name>.py next to the first table]")

    sub.add_parser("presets", help="list built-in presets")
    return parser.parse_args(argv)


def _configure_logging(verbose):
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose >= 2:
        level = logging.DEBUG
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("locapart")
    root.handlers[:] = [handler]
    root.setLevel(level)


def main(argv=None):
    """Run the command line interface and return the exit status."""
    args = parse_args(argv)
    _configure_logging(args.verbose)
    try:
        if args.command == "presets":
            print(_presets())
        elif args.command == "run":
            _, written = run(args.config, args.output)
            for path in written:
                print(path)
        else:
            first = args.csv[0]
            stem = os.path.splitext(os.path.basename(first))[0]
            out = args.output or os.path.join(os.path.dirname(first), f"plot_{stem}.py")
            print(emit_plot_script(args.csv, out))
    except (cfgmod.Error, csvdata.Error) as exc:
        print(f"locapart: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"locapart: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _NUMERIC_ERRORS as exc:
        print(f"locapart: error: {type(exc).__module__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK
