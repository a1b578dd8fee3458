"""Command-line front end.

    pdcsim {jsa,sweep,g2,gain,spectrometer,calibrate} [--config PATH]
           [--set key=value ...] [--seed N] [--out DIR] [--quiet]

Every run writes its data products plus ``manifest.json`` (config hash, seed,
library versions, file digests) and ``effective_config.toml`` (the config
after overrides). Outputs are staged in a temporary directory and only moved
into ``--out`` on success, so a failed run leaves no partial files.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import platform
import shutil
import sys
import tempfile
from dataclasses import asdict
from pathlib import Path

import numpy as np
import scipy

import pdcsim
from pdcsim import calibration, detection, schmidt, spectrometer, squeezer
from pdcsim.config import RunConfig, toml_value
from pdcsim.errors import ConfigError, PDCSimError
from pdcsim.export import render_heatmap, sha256_file, write_csv, write_json
from pdcsim.jsa import (
    auto_grid,
    build_jsa,
    energy_mismatch,
    jsi_correlation,
    joint_spectral_intensity,
    marginal_spectrum,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("pdcsim")


def _build_jsa(cfg, fwhm_nm=None):
    pump = cfg.pump(fwhm_nm)
    pm = cfg.phasematching()
    grid = auto_grid(pump, pm, cfg["grid.points"], cfg["grid.pump_sigmas"], cfg["grid.sinc_lobes"])
    return build_jsa(pump, pm, grid)


def _grid_opts(cfg):
    return dict(n_points=cfg["grid.points"], pump_sigmas=cfg["grid.pump_sigmas"],
                sinc_lobes=cfg["grid.sinc_lobes"])


def cmd_jsa(cfg, out: Path):
    jsa = _build_jsa(cfg)
    dec = schmidt.decompose(jsa)
    jsi = joint_spectral_intensity(jsa)
    lam_s, lam_i = (w * 1e9 for w in jsa.grid.wavelengths())
    ii, jj = np.meshgrid(np.arange(lam_s.size), np.arange(lam_i.size), indexing="ij")
    write_csv(out / "jsi.csv", ["signal_wavelength_nm", "idler_wavelength_nm", "intensity"],
              zip(lam_s[ii.ravel()], lam_i[jj.ravel()], jsi.ravel()))
    render_heatmap(jsi, out / "jsi.pgm")
    write_csv(out / "marginals.csv", ["arm", "wavelength_nm", "mass"],
              [("signal", l, m) for l, m in zip(lam_s, marginal_spectrum(jsa, "signal"))]
              + [("idler", l, m) for l, m in zip(lam_i, marginal_spectrum(jsa, "idler"))])
    k = schmidt.effective_mode_number(dec)
    write_json(out / "jsa_summary.json", {
        "K": k,
        "g2_low_gain": schmidt.g2_low_gain(dec),
        "corr": jsi_correlation(jsa),
        "norm": jsa.norm(),
        "energy_mismatch": energy_mismatch(cfg.pump(), cfg.phasematching()),
        "schmidt_coefficients": dec.coefficients[:10],
        "n_modes": dec.n_modes,
        "grid_shape": list(jsa.grid.shape),
        "grid_step_rad_per_s": [jsa.grid.signal_step, jsa.grid.idler_step],
        "intensity_convention": "|f|^2 density in s^2/rad^2; entries sum to 1/(dws*dwi)",
    })
    log.info("jsa: K=%.4f corr=%.3f", k, jsi_correlation(jsa))


def cmd_sweep(cfg, out: Path):
    widths = cfg["sweep.fwhm_nm"]
    rows = schmidt.pump_width_sweep(cfg.pump(), cfg.phasematching(), [w * 1e-9 for w in widths],
                                    n_jobs=cfg["run.n_jobs"], **_grid_opts(cfg))
    # report the configured nm values, not the nm -> m -> nm round trip
    write_csv(out / "sweep.csv", ["fwhm_nm", "K", "g2", "corr"],
              [(w, r.K, r.g2, r.corr) for w, r in zip(widths, rows)])
    best_w, best = min(zip(widths, rows), key=lambda wr: wr[1].K)
    write_json(out / "sweep_summary.json", {
        "rows": [{"fwhm_nm": w, "K": r.K, "g2": r.g2, "corr": r.corr} for w, r in zip(widths, rows)],
        "min_K_fwhm_nm": best_w,
        "min_K": best.K,
    })
    for w, r in zip(widths, rows):
        log.info("sweep: %.3f nm  K=%.4f  g2=%.4f  corr=%+.3f", w, r.K, r.g2, r.corr)


def cmd_g2(cfg, out: Path):
    dec = schmidt.decompose(_build_jsa(cfg))
    state = squeezer.SqueezerState.from_decomposition(dec, cfg["squeezer.gain"])
    det = cfg.detector()
    res = detection.simulate_g2_experiment(state, (det, det), cfg["g2.pulses"], cfg["run.seed"],
                                           splitter_ratio=cfg["g2.splitter_ratio"],
                                           n_jobs=cfg["run.n_jobs"])
    summary = res.to_dict()
    summary.update({
        "gain": state.gain,
        "K": schmidt.effective_mode_number(dec),
        "g2_low_gain": schmidt.g2_low_gain(dec),
        "g2_analytic": squeezer.g2_analytic(state) if state.gain > 0 else float("nan"),
        "mean_photon_number": squeezer.mean_photon_number(state),
        "efficiency": det.efficiency,
        "background": det.background,
    })
    write_json(out / "g2.json", summary)
    log.info("g2: raw=%.4f +- %.4f corrected=%.4f", res.g2_raw, res.standard_error, res.g2_corrected)


def cmd_gain(cfg, out: Path):
    if cfg["gain.single_mode"]:
        coeffs = np.array([1.0])
    else:
        coeffs = schmidt.decompose(_build_jsa(cfg)).coefficients
    powers = cfg["gain.powers"]
    scale = cfg["squeezer.gain_scale"]
    meas = detection.simulate_gain_measurement(coeffs, cfg.detector(), powers, scale,
                                               cfg["gain.pulses_per_point"], cfg["run.seed"])
    curve = squeezer.gain_curve(coeffs, powers, scale)
    db = [squeezer.mean_photon_to_squeezing_db(n) for n in meas["n_analytic"]]
    header = ["power", "gain", "p_click", "n_estimate", "n_analytic", "n_single_mode", "n_linear",
              "squeezing_db"]
    rows = list(zip(meas["power"], curve["gain"], meas["p_click"], meas["n_estimate"],
                    meas["n_analytic"], curve["n_single_mode"], curve["n_linear"], db))
    write_csv(out / "gain.csv", header, rows)
    write_json(out / "gain_summary.json", {
        "K": schmidt.effective_mode_number(coeffs),
        "final_power": powers[-1],
        "final_mean_photon_number": meas["n_analytic"][-1],
        "final_squeezing_db": db[-1],
    })
    log.info("gain: <n>=%.3f at P=%.3g -> %.2f dB", meas["n_analytic"][-1], powers[-1], db[-1])


def cmd_spectrometer(cfg, out: Path):
    jsa = _build_jsa(cfg)
    arm_s, arm_i = cfg.spectrometer_arms()
    if cfg["spectrometer.bin_width_ps"] == "auto":
        lam_s, lam_i = jsa.grid.wavelengths()
        arm_s, arm_i = arm_s.covering(lam_s), arm_i.covering(lam_i)
    det = cfg.detector()
    hist = spectrometer.simulate_spectrometer(jsa, (arm_s, arm_i), (det, det),
                                              cfg["spectrometer.pairs"], cfg["run.seed"])
    est = spectrometer.reconstruct_jsi(hist, (arm_s, arm_i))
    ref = spectrometer.jsi_on_wavelength_grid(jsa, est.signal_wavelengths, est.idler_wavelengths)

    ts = 0.5 * (hist.signal_edges[1:] + hist.signal_edges[:-1]) * 1e12
    ti = 0.5 * (hist.idler_edges[1:] + hist.idler_edges[:-1]) * 1e12
    ii, jj = np.meshgrid(np.arange(ts.size), np.arange(ti.size), indexing="ij")
    write_csv(out / "histogram.csv", ["t_signal_ps", "t_idler_ps", "counts"],
              zip(ts[ii.ravel()], ti[jj.ravel()], hist.counts.ravel()))
    render_heatmap(hist.counts, out / "histogram.pgm")
    ls, li = est.signal_wavelengths * 1e9, est.idler_wavelengths * 1e9
    write_csv(out / "reconstruction.csv", ["signal_wavelength_nm", "idler_wavelength_nm", "intensity"],
              zip(ls[ii.ravel()], li[jj.ravel()], est.intensity.ravel()))
    render_heatmap(est.intensity, out / "reconstruction.pgm")
    sim = spectrometer.similarity(est.intensity, ref) if not est.empty else float("nan")
    write_json(out / "spectrometer.json", {
        "similarity": sim,
        "pairs": hist.pairs,
        "detected": hist.detected,
        "overflow": hist.overflow,
        "empty": est.empty,
        "time_correlation": spectrometer.time_correlation(hist) if hist.detected else float("nan"),
        "jsi_correlation": jsi_correlation(jsa),
        "arms": {"signal": asdict(arm_s), "idler": asdict(arm_i)},
        "seed": cfg["run.seed"],
    })
    log.info("spectrometer: %d coincidences, similarity %.4f", hist.detected, sim)


def cmd_calibrate(cfg, out: Path):
    res = calibration.calibrate(
        cfg.pump(cfg["calibration.target_fwhm_nm"]), cfg.phasematching(),
        target_fwhm=cfg["calibration.target_fwhm_nm"] * 1e-9,
        zero_halfwidth=cfg["calibration.zero_halfwidth_nm"] * 1e-9,
        search_bounds=(cfg["calibration.search_min_nm"] * 1e-9, cfg["calibration.search_max_nm"] * 1e-9),
        **_grid_opts(cfg),
    )
    ps_per_mm = 1e-12 / 1e-3
    fragment = {
        "phasematching.kappa_s_ps_per_mm": res.kappa_s / ps_per_mm,
        "phasematching.kappa_i_ps_per_mm": res.kappa_i / ps_per_mm,
    }
    (out / "calibration.toml").write_text(
        f"# K minimal at {res.fwhm_at_min * 1e9:.6f} nm pump FWHM (K = {res.K_min:.6f}); "
        f"shape {cfg['phasematching.shape']}, L_eff {cfg['phasematching.effective_length_mm']} mm\n"
        + "".join(f"{k} = {toml_value(v)}\n" for k, v in fragment.items()))
    summary = asdict(res)
    summary.update(fragment)
    write_json(out / "calibration.json", summary)
    log.info("calibrate: kappa_s=%.6g kappa_i=%.6g ps/mm (ratio %.4f), K_min=%.5f at %.4f nm",
             fragment["phasematching.kappa_s_ps_per_mm"], fragment["phasematching.kappa_i_ps_per_mm"],
             res.ratio, res.K_min, res.fwhm_at_min * 1e9)


COMMANDS = {
    "jsa": (cmd_jsa, "joint spectral intensity CSV + PGM heatmap"),
    "sweep": (cmd_sweep, "K / g2 / JSI correlation versus pump FWHM"),
    "g2": (cmd_g2, "Monte-Carlo beamsplitter g2 experiment"),
    "gain": (cmd_gain, "click probability and mean photon number versus pump power"),
    "spectrometer": (cmd_spectrometer, "dispersive-fiber spectrometer simulation and reconstruction"),
    "calibrate": (cmd_calibrate, "solve phasematching slopes for the separable pump width"),
}


def _manifest(cfg, command, out: Path):
    files = sorted(p.name for p in out.iterdir() if p.is_file())
    return {
        "command": command,
        "config_sha256": cfg.digest(),
        "seed": cfg["run.seed"],
        "versions": {
            "pdcsim": pdcsim.__version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "files": {name: sha256_file(out / name) for name in files},
    }


def build_parser():
    parser = argparse.ArgumentParser(prog="pdcsim", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", metavar="PATH", help="TOML config file (flat dotted keys)")
        p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                       help="override one config key (repeatable)")
        p.add_argument("--seed", type=int, help="RNG seed (overrides run.seed)")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides run.output_dir)")
        p.add_argument("--quiet", action="store_true", help="only report errors")
    return parser


def run(command, config=None, overrides=(), seed=None, out=None) -> int:
    """Run one subcommand; returns the process exit code."""
    try:
        cfg = RunConfig.load(config, overrides, seed)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG

    out_dir = Path(out if out is not None else cfg["run.output_dir"])
    staging = None
    try:
        out_dir.parent.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=".pdcsim-", dir=out_dir.parent))
        COMMANDS[command][0](cfg, staging)
        (staging / "effective_config.toml").write_text(cfg.to_toml())
        manifest = _manifest(cfg, command, staging)
        write_json(staging / "manifest.json", manifest)
        out_dir.mkdir(parents=True, exist_ok=True)
        for f in staging.iterdir():
            shutil.move(str(f), str(out_dir / f.name))
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except PDCSimError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        log.error("invalid parameter: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    finally:
        if staging is not None:
            shutil.rmtree(staging, ignore_errors=True)
    log.info("wrote %s", out_dir)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    return run(args.command, args.config, args.set, args.seed, args.out)


if __name__ == "__main__":
    sys.exit(main())
