"""Acceptance gate: every criterion at its stated tolerance, one line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS/FAIL lines.
"""

import json
import math
import statistics
import time

import numpy as np

from gazeinspect import (
    AttentionLevel,
    AttentionMetrics,
    AttentionThresholds,
    CameraConfig,
    DefectEstimate,
    DefectKind,
    DispersionSegmenter,
    FixationEvent,
    InspectionPipeline,
    PipelineConfig,
    SaccadeEvent,
    SurfaceOrientation,
    classify,
    convex_hull,
    dispersion_diameter,
    euler_from_normal,
    framing,
    plan_pose,
    rot_x,
    rot_y,
    should_stop,
)
from gazeinspect.attention import AttentionTransition
from gazeinspect.pipeline import DefectResult
from gazeinspect.replay import replay_file, strip_volatile
from gazeinspect.service import SessionStore
from gazeinspect.sim import (
    InspectorScript,
    NoiseModel,
    Phase,
    PlantedDefect,
    ScenePlan,
    ScriptPhase,
    WallPlane,
    default_script_for,
    generate_stream,
    random_convex_defect,
    run_trials,
)
from gazeinspect.wire import SessionPipeline, sample_to_frame

from conftest import PERIOD_US, make_sample
from test_defect import brute_force_hull, cyclic_area

WALL = WallPlane(center=(0.0, 0.0, 2.0), normal=(0.0, 0.0, -1.0))
VIEW = (0.0, 0.0, 0.0)


def gate(number: int, description: str, passed: bool, detail: str = ""):
    status = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {number:02d} {status} - {description}{suffix}")
    assert passed, f"criterion {number}: {description}{suffix}"


def test_01_fixation_segmentation_exactness():
    rng = np.random.default_rng(101)
    t_start = time.perf_counter()
    ok = True
    for k in range(1, 21):
        counts = [int(rng.integers(8, 30)) for _ in range(k)]
        centers = []
        x = 0.0
        for _ in range(k):
            centers.append(
                (x, float(rng.uniform(-1, 1)), float(rng.uniform(2.0, 6.0)))
            )
            x += 5.0  # far beyond any dispersion sphere
        seg = DispersionSegmenter()
        events = []
        t = 0
        for center, n in zip(centers, counts):
            for _ in range(n):
                events += seg.ingest(make_sample(t, center))
                t += PERIOD_US
        events += seg.flush()
        fixations = [e for e in events if isinstance(e, FixationEvent)]
        saccades = [e for e in events if isinstance(e, SaccadeEvent)]
        if len(fixations) != k or saccades:
            ok = False
        if [e.sample_count for e in events] != counts:
            ok = False
    elapsed = time.perf_counter() - t_start
    gate(
        1,
        "noise-free streams with K planted fixations segment exactly",
        ok and elapsed < 1.0,
        f"K=1..20 exact, runtime {elapsed:.3f}s",
    )


def test_02_dispersion_parameters_honored():
    def run(n):
        seg = DispersionSegmenter()
        events = []
        for i in range(n):
            events += seg.ingest(make_sample(i * PERIOD_US, (0, 0, 2)))
        events += seg.ingest(make_sample(n * PERIOD_US, (1.0, 1.0, 2.0)))
        return events

    eight = run(8)
    seven = run(7)
    count_rule = (
        len(eight) == 1
        and isinstance(eight[0], FixationEvent)
        and eight[0].sample_count == 8
        and len(seven) == 1
        and isinstance(seven[0], SaccadeEvent)
    )

    radius = dispersion_diameter(2.0, 2.86) / 2.0

    def offset_sample(frac):
        x = frac * radius
        return make_sample(PERIOD_US, (x, 0.0, math.sqrt(4.0 - x * x)))

    seg_in = DispersionSegmenter()
    seg_in.ingest(make_sample(0, (0, 0, 2)))
    joined = seg_in.ingest(offset_sample(0.99)) == []
    seg_out = DispersionSegmenter()
    seg_out.ingest(make_sample(0, (0, 0, 2)))
    split = len(seg_out.ingest(offset_sample(1.01))) == 1
    gate(
        2,
        "8 clustered samples -> fixation, 7 -> saccade, threshold +/-1% flips",
        count_rule and joined and split,
    )


def test_03_attention_truth_table():
    th = AttentionThresholds()

    def oracle(fr, msl, mfd):
        # independent restatement of the level rules
        if fr >= 0.90 and msl <= 0.15 and mfd >= 300.0:
            return AttentionLevel.INSPECTING
        if fr >= 0.50 and msl <= 0.5:
            return AttentionLevel.FOCUSING
        return AttentionLevel.SCANNING

    ok = True
    for fr in (0.95, 0.55):
        for msl in (0.10, 0.30):
            for mfd in (350.0, 200.0):
                m = AttentionMetrics(fr=fr, mfd_ms=mfd, msl_m=msl, window_s=5.0)
                if classify(m, th) is not oracle(fr, msl, mfd):
                    ok = False
    # spot rows including scanning
    extra = [
        (0.95, 0.10, 350.0, AttentionLevel.INSPECTING),
        (0.55, 0.45, 200.0, AttentionLevel.FOCUSING),
        (0.95, 0.10, 250.0, AttentionLevel.FOCUSING),
        (0.30, 0.10, 350.0, AttentionLevel.SCANNING),
        (0.95, 0.80, 350.0, AttentionLevel.SCANNING),
    ]
    for fr, msl, mfd, expected in extra:
        if classify(AttentionMetrics(fr, mfd, msl, 5.0), th) is not expected:
            ok = False
    gate(3, "all 8 threshold-clause combinations classify per the oracle", ok)


def test_04_normal_angle_round_trip():
    rng = np.random.default_rng(404)
    z = np.array([0.0, 0.0, 1.0])
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(10_000):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        tx, ty = euler_from_normal(v)
        err = float(np.linalg.norm(rot_y(ty) @ rot_x(tx) @ z + v))
        worst = max(worst, err)
    elapsed = time.perf_counter() - t0
    singular_ok = (
        euler_from_normal([0.0, 1.0, 0.0])[1] == 0.0
        and euler_from_normal([0.0, -1.0, 0.0])[1] == 0.0
    )
    gate(
        4,
        "10,000 random normals round-trip below 1e-9; singular pins ty to 0",
        worst < 1e-9 and singular_ok and elapsed < 1.0,
        f"worst {worst:.2e}, runtime {elapsed:.3f}s",
    )


def test_05_hull_matches_brute_force():
    rng = np.random.default_rng(505)
    ok = True
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(3, 41))
        pts = rng.uniform(-1.0, 1.0, (n, 2))
        verts, area = convex_hull(pts)
        oracle = brute_force_hull(pts)
        if not np.array_equal(verts, oracle):
            ok = False
            break
        gap = abs(area - cyclic_area(oracle))
        worst = max(worst, gap)
        if gap > 1e-12:
            ok = False
            break
    gate(
        5,
        "1,000 random hulls identical to the O(n^3) oracle",
        ok,
        f"worst area gap {worst:.2e}",
    )


def test_06_stop_rule_boundaries():
    plateau = all(
        should_stop([1.0] * n) is (n >= 6) for n in range(1, 10)
    )
    growing = True
    history = [1.0]
    for _ in range(60):
        history.append(history[-1] * 1.011)  # every step grows > 1% of current
        if should_stop(history):
            growing = False
    exact = should_stop([50.0, 99.0, 99.0, 99.0, 99.0, 99.0, 100.0][1:])
    gate(
        6,
        "stop rule: plateau stops at entry 6, >1% growth never, exactly 1% stops",
        plateau and growing and exact,
    )


def test_07_pose_geometry():
    rng = np.random.default_rng(707)
    camera = CameraConfig()
    sin80 = math.sin(math.radians(80.0))
    worst_dist = worst_look = worst_cover = 0.0
    n = 0
    while n < 1000:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        if abs(v[1]) >= sin80:
            continue
        n += 1
        tx, ty = euler_from_normal(v)
        w = float(rng.uniform(0.05, 1.0))
        h = float(rng.uniform(0.01, w))
        tz = float(rng.uniform(0.0, 90.0))
        center = tuple(rng.uniform(-3.0, 3.0, 3))
        defect = DefectEstimate(
            center=center,
            avg_normal=tuple(v),
            theta_x_deg=tx,
            theta_y_deg=ty,
            w=w,
            h=h,
            theta_z_deg=tz,
            area_m2=w * h * 0.7,
            kind=DefectKind.AREA,
            orientation=SurfaceOrientation.HORIZONTAL,
        )
        pose = plan_pose(defect, camera)
        gap = np.linalg.norm(np.asarray(pose.position) - np.asarray(center))
        worst_dist = max(worst_dist, abs(gap - pose.standoff_m))
        look = rot_y(pose.pan_deg) @ rot_x(pose.tilt_deg) @ np.array([0.0, 0.0, 1.0])
        worst_look = max(worst_look, float(np.linalg.norm(look + v)))
        W, H, omega = framing(w, h, tz, defect.orientation, camera.aspect_ratio)
        fov, ref = (
            (camera.theta_h_deg, W) if omega >= 1.0 else (camera.theta_v_deg, H)
        )
        span = 2.0 * pose.standoff_m * math.tan(math.radians(fov) / 2.0)
        worst_cover = max(worst_cover, abs(span - camera.safety_factor * ref))
    gate(
        7,
        "1,000 poses: distance exact, look-at equals -v, coverage identity",
        worst_dist < 1e-12 and worst_look < 1e-9 and worst_cover < 1e-9,
        f"|d| {worst_dist:.1e}, look {worst_look:.1e}, cover {worst_cover:.1e}",
    )


def test_08_desk_scale_error_reproduction():
    t0 = time.perf_counter()
    means = {}
    for size, mult, inspect_s in (("small", 1.0, 20.0), ("large", 4.0, 26.0)):
        rng = np.random.default_rng(2024)
        reports = []
        for k in range(16):
            area = float(rng.uniform(0.06, 0.14))  # 600-1400 cm^2
            cu = float(rng.uniform(-0.8, 0.8))
            cv = float(rng.uniform(-0.4, 0.4))
            defect = random_convex_defect(rng, f"d{k}", area, center_uv=(cu, cv))
            if mult != 1.0:
                c = defect.polygon.mean(axis=0)
                nc = np.clip(c, [-1.1, -0.4], [1.1, 0.4])
                defect = PlantedDefect(
                    defect.defect_id, (defect.polygon - c) * math.sqrt(mult) + nc
                )
            scene = ScenePlan(wall=WALL, defects=[defect])
            script = default_script_for(
                scene, f"d{k}", viewpoint=VIEW, inspect_s=inspect_s
            )
            reports.extend(
                run_trials(
                    scene,
                    script,
                    NoiseModel(seed=55 + k),  # calibrated anchors, scale 1
                    CameraConfig(),
                    n_trials=3,
                    seed=100 + k,
                )
            )
        ok = [r for r in reports if not r.failed]
        means[size] = {
            "n": len(reports),
            "failed": len(reports) - len(ok),
            "dA": statistics.mean(r.delta_area_pct for r in ok),
            "dz": statistics.mean(r.delta_depth_pct for r in ok),
            "dxy": statistics.mean(r.delta_plane_pct for r in ok),
        }
    elapsed = time.perf_counter() - t0
    s, l = means["small"], means["large"]
    passed = (
        s["failed"] == 0
        and l["failed"] == 0
        and s["dA"] <= 15.0
        and s["dz"] <= 10.0
        and s["dxy"] <= 10.0
        and l["dA"] <= s["dA"] + 2.0
        and elapsed < 120.0
    )
    gate(
        8,
        "48+48 calibrated-noise trials at 2 m within error budgets",
        passed,
        "small dA={dA:.2f}% dz={dz:.2f}% dxy={dxy:.2f}%".format(**s)
        + f"; large dA={l['dA']:.2f}%; runtime {elapsed:.1f}s",
    )


def test_09_scripted_attention_occupancy():
    d1 = PlantedDefect(
        "d1", np.array([(-0.18, -0.1), (0.18, -0.1), (0.18, 0.1), (-0.18, 0.1)]) + np.array([-0.7, 0.0])
    )
    d2 = PlantedDefect(
        "d2", np.array([(-0.15, -0.12), (0.15, -0.12), (0.15, 0.12), (-0.15, 0.12)]) + np.array([0.7, 0.0])
    )
    scene = ScenePlan(wall=WALL, defects=[d1, d2])
    durations = {
        Phase.SCAN: (180.0, 275.0),
        Phase.FOCUS: (180.0, 275.0),
        Phase.INSPECT: (310.0, 380.0),
    }
    phases = [
        ScriptPhase(Phase.SCAN, 12.0),
        ScriptPhase(Phase.FOCUS, 10.0, "d1"),
        ScriptPhase(Phase.INSPECT, 18.0, "d1"),
        ScriptPhase(Phase.SCAN, 10.0),
        ScriptPhase(Phase.FOCUS, 10.0, "d2"),
        ScriptPhase(Phase.INSPECT, 18.0, "d2"),
    ]
    script = InspectorScript(
        phases=phases, viewpoint=VIEW, fixation_duration_ms=durations
    )
    stream = generate_stream(scene, script, NoiseModel(seed=21), 60.0, seed=77)

    config = PipelineConfig()
    window_us = config.attention.window_s * 1e6
    pipeline = InspectionPipeline(config)
    timeline = []  # (t_us, level) change points
    poses = []
    inspect_entries = []
    for sample in stream:
        for out in pipeline.process(sample):
            if isinstance(out, AttentionTransition):
                timeline.append((out.t_us, out.to_level))
                if out.to_level is AttentionLevel.INSPECTING:
                    inspect_entries.append(out.t_us)
            if isinstance(out, DefectResult):
                poses.append(out)

    def occupancy(level, a_us, b_us):
        t_points = [(0, AttentionLevel.SCANNING)] + timeline
        total = 0.0
        for (t0, lv), (t1, _) in zip(t_points, t_points[1:] + [(b_us, None)]):
            lo, hi = max(t0, a_us), min(t1, b_us)
            if hi > lo and lv is level:
                total += hi - lo
        return total / (b_us - a_us)

    expected = [
        AttentionLevel.SCANNING,
        AttentionLevel.FOCUSING,
        AttentionLevel.INSPECTING,
        AttentionLevel.SCANNING,
        AttentionLevel.FOCUSING,
        AttentionLevel.INSPECTING,
    ]
    edges = np.cumsum([0.0] + [p.duration_s for p in phases]) * 1e6
    occupancies = []
    ok = True
    scan_windows = []
    for i, (phase, level) in enumerate(zip(phases, expected)):
        a = edges[i] + window_us  # one window of transition slack per boundary
        b = edges[i + 1]
        occ = occupancy(level, a, b)
        occupancies.append(occ)
        if occ < 0.90:
            ok = False
        if phase.kind is Phase.SCAN:
            scan_windows.append((edges[i], edges[i + 1]))

    spurious = [
        t for t in inspect_entries if any(a <= t <= b for a, b in scan_windows)
    ]
    passed = ok and len(poses) == 2 and not spurious
    gate(
        9,
        "scripted scan/focus/inspect phases hold >=90% correct occupancy",
        passed,
        "occ=" + ",".join(f"{o:.2f}" for o in occupancies)
        + f"; poses={len(poses)}; spurious inspecting={len(spurious)}",
    )


def test_10_replay_determinism_and_throughput(tmp_path):
    scene = ScenePlan(
        wall=WALL,
        defects=[
            PlantedDefect(
                "sq", np.array([(-0.15, -0.15), (0.15, -0.15), (0.15, 0.15), (-0.15, 0.15)])
            )
        ],
    )
    script = default_script_for(scene, "sq", VIEW, scan_s=20.0, focus_s=15.0, inspect_s=25.0)
    stream = generate_stream(scene, script, NoiseModel(seed=3), 60.0, seed=12)

    store = SessionStore(tmp_path)
    session = SessionPipeline(config=PipelineConfig())
    writer = store.open(session)
    recorded = []
    for sample in stream:
        line = json.dumps(sample_to_frame(sample))
        writer.record_inbound(line)
        frames, _ = session.handle_line(line)
        for f in frames:
            writer.record_frame(f)
        recorded.extend(frames)
    for f in session.handle_close():
        writer.record_frame(f)
        recorded.append(f)
    writer.close()
    path = tmp_path / f"{session.session_id}.jsonl"

    t0 = time.perf_counter()
    replayed = replay_file(path, speed="max")
    elapsed = time.perf_counter() - t0
    span_s = (stream[-1].t_us - stream[0].t_us) / 1e6
    speedup = span_s / elapsed

    identical = [strip_volatile(f) for f in replayed] == [
        strip_volatile(f) for f in recorded
    ]
    has_pose = any(f["type"] == "pose" for f in recorded)
    gate(
        10,
        "max-speed replay is bit-identical and sustains >=100x real time",
        identical and has_pose and speedup >= 100.0,
        f"{span_s:.0f}s stream replayed in {elapsed:.2f}s ({speedup:.0f}x)",
    )
