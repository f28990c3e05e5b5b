"""
命令行入口

子命令：synthesize、focus-scan、rcs-sweep、link、fmcw、calibrate
退出码：0 成功；1 配置或输入校验失败；2 计算过程出错
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from app.config import settings
from app.core.exceptions import BaseToolkitException, ConfigValidationException
from app.core.units import wavelength_of
from app.engine import fmcw, link, propagation, scatter, synthesis
from app.schemas.experiment import ExperimentConfig, load_experiment_config, validate_inputs
from app.utils.artifacts import write_csv, write_key_values, write_pgm
from app.utils.helpers import config_sha256, format_value

logger = logging.getLogger("app.cli")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

# 不影响结果的配置项，不计入配置哈希
HASH_EXCLUDE = {"output_dir", "threads"}


class _ArgumentParser(argparse.ArgumentParser):
    """参数错误按配置校验失败处理（退出码 1）"""

    def error(self, message):
        raise ConfigValidationException(f"参数错误: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="metalens-marker",
        description="超表面透镜逆向反射雷达标记的设计与验证工具",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", type=str, default=None, help="TOML 配置文件路径")
    parser.add_argument("--out", type=str, default=None, help="输出目录（覆盖配置）")
    parser.add_argument("--seed", type=int, default=None, help="随机种子（覆盖配置）")
    parser.add_argument("--threads", type=int, default=None, help="并行线程数（覆盖配置）")
    parser.add_argument("--record", action="store_true", help="将本次运行写入运行记录表")
    parser.add_argument("--log-level", type=str, default=settings.LOG_LEVEL, help="日志级别")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    sub.add_parser("synthesize", help="透镜相位综合与量化")
    focus = sub.add_parser("focus-scan", help="焦点扫描")
    focus.add_argument("--slice", action="store_true", help="同时输出 x–z 强度切片")
    sub.add_parser("rcs-sweep", help="RCS–方位扫描")
    sub.add_parser("link", help="链路预算")
    sub.add_parser("fmcw", help="FMCW 帧合成与处理")
    sub.add_parser("calibrate", help="球体定标")
    return parser


# ==================== 公共构建 ====================

def _lens_spec(config: ExperimentConfig, cells_per_side: Optional[int] = None) -> synthesis.LensSpec:
    block = config.lens
    return synthesis.LensSpec(
        cells_per_side=cells_per_side or block.cells_per_side,
        pitch_mm=block.cell_pitch_mm,
        focal_length_mm=block.focal_length_mm,
        design_frequency_ghz=block.frequency_ghz,
    )


def _lens_mask(config: ExperimentConfig, library) -> Any:
    lens = synthesis.build_quantized_lens(_lens_spec(config), library)
    return synthesis.lens_to_mask(lens, config.lens.samples_per_cell, config.lens.mask_mode)


def _patch_spec(config: ExperimentConfig) -> scatter.PatchPlaneSpec:
    block = config.tag
    return scatter.PatchPlaneSpec(
        patch_length_mm=block.patch_length_mm,
        patch_width_mm=block.patch_width_mm,
        period_mm=block.patch_period_mm,
        extent_mm=(block.board_extent_mm, block.board_extent_mm),
        patch_reflection=block.patch_reflection,
        ground_reflection=block.ground_reflection,
    )


# ==================== 子命令 ====================

def cmd_synthesize(config: ExperimentConfig, loaded: Dict[str, Any], out: Path, config_hash: str) -> Dict[str, Any]:
    """量化透镜CSV、各规模相位剖面CSV、(0, j) 列分配表"""
    library = loaded["library"]
    lens = synthesis.build_quantized_lens(_lens_spec(config), library)
    write_csv(out / "quantized_lens.csv", synthesis.LENS_EXPORT_HEADER, synthesis.quantized_lens_rows(lens), config_hash)

    for n in config.lens.profile_sizes:
        profile = synthesis.sample_profile(_lens_spec(config, n))
        write_csv(
            out / f"profile_n{n}.csv",
            ["i", "j", "ideal_phase_deg"],
            ([s.i, s.j, s.ideal_phase_deg] for s in profile),
            config_hash,
        )

    table = synthesis.ring_table(lens)
    header = list(table[0].keys())
    write_csv(out / "ring_table.csv", header, ([row[k] for k in header] for row in table), config_hash)
    print(",".join(header))
    for row in table:
        print(",".join(format_value(row[k]) for k in header))

    summary = {
        "cells_per_side": lens.spec.cells_per_side,
        "library_size": len(library),
        "max_library_gap_deg": synthesis.max_library_gap(library),
        **synthesis.quantization_error_stats(lens),
    }
    write_key_values(out / "synthesis_summary.txt", summary, config_hash)
    return summary


def cmd_focus_scan(config: ExperimentConfig, loaded: Dict[str, Any], out: Path, config_hash: str, slice_grid: bool = False) -> Dict[str, Any]:
    """轴上强度扫描，可选 x–z 切片"""
    mask = _lens_mask(config, loaded["library"])
    scan = config.scan
    result = propagation.focal_scan(
        mask, scan.z_start_mm, scan.z_stop_mm, scan.steps, config.propagation.padding_factor, config.threads
    )
    write_csv(out / "focal_scan.csv", ["z_mm", "intensity"], zip(result.z_mm, result.intensity), config_hash)
    summary = {
        "peak_z_mm": result.peak_z_mm,
        "peak_intensity": result.peak_intensity,
        "design_focal_length_mm": config.lens.focal_length_mm,
    }
    if slice_grid or scan.slice:
        z, x, intensity = propagation.field_slice(
            mask, scan.z_start_mm, scan.z_stop_mm, scan.slice_steps, config.propagation.padding_factor
        )
        rows = ([z[a], x[b], intensity[a, b]] for a in range(len(z)) for b in range(len(x)))
        write_csv(out / "field_slice.csv", ["z_mm", "x_mm", "intensity"], rows, config_hash)
        summary["slice_shape"] = f"{len(z)}x{len(x)}"
    write_key_values(out / "focus_summary.txt", summary, config_hash)
    return summary


def cmd_rcs_sweep(config: ExperimentConfig, loaded: Dict[str, Any], out: Path, config_hash: str) -> Dict[str, Any]:
    """标签与/或单独贴片层的 RCS–方位扫描、统计、布拉格方向和对比表"""
    block = config.tag
    sweep_cfg = config.sweep
    tag = scatter.TagAssembly(
        lens_mask=_lens_mask(config, loaded["library"]),
        patch_plane=_patch_spec(config),
        separation_mm=block.separation_mm,
        board_extent_mm=block.board_extent_mm,
        padding_factor=config.propagation.padding_factor,
        angle_multiplier=loaded.get("angle_multiplier"),
    )
    sweeps: Dict[str, scatter.RcsSweep] = {}
    if block.mode in ("tag", "both"):
        sweeps["tag"] = scatter.sweep_rcs(
            tag, sweep_cfg.start_deg, sweep_cfg.stop_deg, sweep_cfg.step_deg, threads=config.threads, label="tag"
        )
    if block.mode in ("patch", "both"):
        sweeps["patch"] = scatter.sweep_rcs(
            tag.patch_plane, sweep_cfg.start_deg, sweep_cfg.stop_deg, sweep_cfg.step_deg,
            like=scatter.board_grid(tag), threads=config.threads, label="patch",
        )

    summary: Dict[str, Any] = {}
    simulated = []
    for name, sweep in sweeps.items():
        write_csv(out / f"rcs_{name}.csv", ["theta_deg", "rcs_dbsm"], scatter.sweep_rows(sweep), config_hash)
        stats = scatter.sweep_stats(sweep, sweep_cfg.coverage_deg)
        for key, value in stats.model_dump().items():
            summary[f"{name}_{key}"] = value
        extent = block.board_extent_mm
        height = block.separation_mm if name == "tag" else 0.0
        simulated.append((f"simulated_{name}", f"{extent:g}x{extent:g}x{height:g}", stats))

    if "tag" in sweeps and "patch" in sweeps:
        for lo, hi in sweep_cfg.improvement_intervals_deg:
            improvement = scatter.sweep_improvement(sweeps["tag"], sweeps["patch"], lo, hi)
            for key, value in improvement.items():
                summary[f"{key}_{lo:g}_{hi:g}"] = value

    bragg = scatter.bragg_angles(block.patch_period_mm, wavelength_of(config.lens.frequency_ghz), sweep_cfg.bragg_orders)
    for order, angle in zip(bragg.orders, bragg.angles_deg):
        summary[f"bragg_order_{order}_deg"] = angle
    summary["bragg_omitted"] = bragg.omitted

    table = scatter.comparison_table(loaded["comparison"], simulated)
    write_csv(
        out / "comparison.csv",
        scatter.COMPARISON_HEADER,
        ([row[k] for k in scatter.COMPARISON_HEADER] for row in table),
        config_hash,
    )
    write_key_values(out / "rcs_summary.txt", summary, config_hash)
    return summary


def cmd_link(config: ExperimentConfig, loaded: Dict[str, Any], out: Path, config_hash: str) -> Dict[str, Any]:
    """链路预算报告与 SNR–距离曲线"""
    block = config.link
    anchor = link.SnrSample(range_m=block.anchor_range_m, snr_db=block.anchor_snr_db)
    wavelength_m = wavelength_of(config.lens.frequency_ghz) * 1e-3
    rows = link.link_report(
        anchor,
        threshold_db=block.threshold_db,
        wavelength_m=wavelength_m,
        tag_rcs_dbsm=block.tag_rcs_dbsm,
        reference_rcs_dbsm=block.reference_rcs_dbsm,
        marker_delta_db=block.marker_delta_db,
    )
    cal = config.calibration
    rows.append(link.LinkRow(
        quantity="sphere_rcs", value=link.sphere_rcs(cal.sphere_diameter, cal.sphere_unit), unit="dBsm"
    ))
    curve = link.snr_curve(anchor, block.curve_ranges_m)
    if len(curve) >= 2:
        rows.append(link.LinkRow(quantity="range_slope", value=link.fit_range_slope(curve), unit="dB/decade"))

    write_csv(out / "link_report.csv", ["quantity", "value", "unit"], ([r.quantity, r.value, r.unit] for r in rows), config_hash)
    write_key_values(out / "link_report.txt", [(r.quantity, r.value) for r in rows], config_hash)
    write_csv(out / "snr_curve.csv", ["range_m", "snr_db"], ([s.range_m, s.snr_db] for s in curve), config_hash)
    return link.report_dict(rows)


def cmd_fmcw(config: ExperimentConfig, loaded: Dict[str, Any], out: Path, config_hash: str) -> Dict[str, Any]:
    """派生参数、帧合成与处理、峰值与 SNR、可选的有/无标签成像对比"""
    chirp: fmcw.ChirpConfig = loaded["chirp"]
    array: fmcw.VirtualArray = loaded["array"]
    derived = fmcw.derived_params(chirp)
    summary: Dict[str, Any] = dict(derived.model_dump())

    frame = fmcw.synthesize_frame(chirp, array, loaded["targets"], config.noise_spec())
    ra_map = fmcw.process_frame(frame, config.threads)
    noise_map = None
    if config.noise.level_db is not None and config.noise.sky_frame:
        sky = fmcw.synthesize_frame(chirp, array, [], config.noise_spec(seed_offset=1))
        noise_map = fmcw.process_frame(sky, config.threads)
    peak = fmcw.peak_and_snr(ra_map, noise_map=noise_map)
    summary.update({f"peak_{k}": v for k, v in peak.model_dump().items() if v is not None})

    rows = (
        [ra_map.range_m[r], ra_map.azimuth_deg[a], ra_map.power[r, a]]
        for r in range(ra_map.range_m.size)
        for a in range(ra_map.azimuth_deg.size)
    )
    write_csv(out / "range_azimuth.csv", ["range_m", "azimuth_deg", "power_linear"], rows, config_hash)
    write_pgm(out / "range_azimuth.pgm", ra_map.power, config_hash)

    if config.scene is not None:
        scene = config.scene
        study = fmcw.imaging_study(
            chirp, array,
            bike=fmcw.PointTarget(range_m=scene.range_m, rcs_dbsm=scene.bike_rcs_dbsm),
            marker=fmcw.PointTarget(range_m=scene.range_m, rcs_dbsm=scene.marker_rcs_dbsm),
            azimuths_deg=scene.azimuths_deg,
            window_m=scene.window_m,
            noise=config.noise_spec(),
            workers=config.threads,
        )
        write_csv(
            out / "imaging_study.csv",
            ["azimuth_deg", "marker_delta_db", "range_factor"],
            ([r.azimuth_deg, r.marker_delta_db, r.range_factor] for r in study),
            config_hash,
        )
        for row in study:
            summary[f"marker_delta_{row.azimuth_deg:g}deg_db"] = row.marker_delta_db

    write_key_values(out / "fmcw_report.txt", summary, config_hash)
    return summary


def cmd_calibrate(config: ExperimentConfig, loaded: Dict[str, Any], out: Path, config_hash: str) -> Dict[str, Any]:
    """球体理论 RCS、定标因子和待测目标 RCS"""
    cal = config.calibration
    sphere = link.sphere_rcs(cal.sphere_diameter, cal.sphere_unit)
    factor = link.calibrate(cal.sphere_power_db, sphere, cal.range_m)
    summary: Dict[str, Any] = {
        "sphere_rcs_dbsm": sphere,
        "calibration_factor_db": factor.factor_db,
        "reference_range_m": factor.reference_range_m,
    }
    if cal.target_power_db is not None:
        summary["target_rcs_dbsm"] = link.apply_calibration(
            factor, cal.target_power_db, cal.target_range_m, correct_range=cal.target_range_m is not None
        )
    write_key_values(out / "calibration.txt", summary, config_hash)
    return summary


COMMANDS: Dict[str, Callable[..., Dict[str, Any]]] = {
    "synthesize": cmd_synthesize,
    "focus-scan": cmd_focus_scan,
    "rcs-sweep": cmd_rcs_sweep,
    "link": cmd_link,
    "fmcw": cmd_fmcw,
    "calibrate": cmd_calibrate,
}


# ==================== 入口 ====================

def _record(command: str, config: ExperimentConfig, config_hash: str, summary: Any, out: Path, failed: bool) -> None:
    from app.database import get_db_context, init_tables
    from app.models.experiment_run import RunStatus
    from app.utils.run_registry import record_run

    init_tables()
    with get_db_context() as db:
        record_run(
            db, command, config_hash, config.seed, summary, str(out),
            status=RunStatus.FAILED if failed else RunStatus.SUCCEEDED,
        )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    命令行主函数

    Args:
        argv: 参数列表，None 时使用 sys.argv

    Returns:
        退出码
    """
    try:
        args = build_parser().parse_args(argv)
    except BaseToolkitException as e:
        print(f"错误: {e.detail}", file=sys.stderr)
        return EXIT_VALIDATION

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    # 校验阶段：配置与所有输入文件
    try:
        config = load_experiment_config(
            args.config, {"seed": args.seed, "threads": args.threads, "output_dir": args.out}
        )
        loaded = validate_inputs(config, args.command)
    except BaseToolkitException as e:
        logger.error("校验失败: %s", e.detail)
        print(f"错误: {e.detail}", file=sys.stderr)
        return EXIT_VALIDATION

    config_hash = config_sha256(config.model_dump(mode="json", exclude=HASH_EXCLUDE))
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    logger.info("%s: config_sha256=%s, 输出目录 %s", args.command, config_hash, out)

    # 计算阶段
    extra = {"slice_grid": args.slice} if args.command == "focus-scan" else {}
    summary: Any = None
    exit_code = EXIT_OK
    try:
        summary = COMMANDS[args.command](config, loaded, out, config_hash, **extra)
    except Exception as e:
        detail = e.detail if isinstance(e, BaseToolkitException) else str(e)
        logger.exception("计算失败: %s", detail)
        print(f"错误: {detail}", file=sys.stderr)
        summary = {"error": detail}
        exit_code = EXIT_RUNTIME

    if exit_code == EXIT_OK:
        for key, value in summary.items():
            print(f"{key}={format_value(value)}")

    if args.record:
        try:
            _record(args.command, config, config_hash, summary, out, failed=exit_code != EXIT_OK)
        except Exception as e:
            logger.error("运行记录写入失败: %s", e)
            return EXIT_RUNTIME
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
