//! Acceptance suite. Every test prints one `[PASS]`/`[FAIL]` line to stderr
//! (visible without `--nocapture`) and then asserts the same condition.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sceneforge::colors::generate_colors;
use sceneforge::datagen::{
    benchmark, estimate_memory, generate_offline, linear_fit_r2, scene_dir_name, Annotations,
    BenchSpec, FeatureSet, GeneratorConfig, Manifest, MemoryModelParams, SceneStream,
};
use sceneforge::domain::{is_foreground, MaskKind, MaskSet};
use sceneforge::packing::{height_limit, pack, realize, shrink, Orientation, RectSize, Shrinkage};
use sceneforge::transform::TransformConfig;
use sceneforge::SceneBundle;

// Timing-sensitive criteria must not share the CPU with each other.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{tag}] {name}: {detail}");
    assert!(pass, "{name}: {detail}");
}

fn ceil_sqrt(n: u64) -> u64 {
    (1..).find(|c| c * c >= n).unwrap()
}

/// Height limit with theta = t / 100, in integers.
fn height_limit_oracle(shrinked: &[RectSize], original: &[RectSize], t: u64) -> u32 {
    let max_h = original.iter().map(|r| r.h as u64).max().unwrap();
    let sum: u64 = shrinked.iter().map(|r| r.h as u64).sum();
    let den = 100 * ceil_sqrt(shrinked.len() as u64);
    max_h.max((t * sum).div_ceil(den)) as u32
}

/// Half-up rounding of (1 - k/1000) d, at least 1.
fn shrink_oracle(d: u32, k: u64) -> u32 {
    (((1000 - k) * d as u64 + 500) / 1000).max(1) as u32
}

fn disjoint(a: (u32, u32, u32, u32), b: (u32, u32, u32, u32)) -> bool {
    a.0 + a.2 <= b.0 || b.0 + b.2 <= a.0 || a.1 + a.3 <= b.1 || b.1 + b.3 <= a.1
}

#[test]
fn packing_validity_fuzz() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut failures = Vec::new();
    for case in 0..1000 {
        let n = rng.random_range(1..=32);
        let orig: Vec<RectSize> = (0..n)
            .map(|_| RectSize::new(rng.random_range(16..=512), rng.random_range(16..=512)))
            .collect();
        let k = rng.random_range(0..=500u64);
        let t = rng.random_range(50..=300u64);
        let shrinked = shrink(&orig, Shrinkage::new(k as f64 / 1000.0).unwrap());
        let h_hat = height_limit_oracle(&shrinked, &orig, t);
        let layout = pack(&shrinked, h_hat).unwrap();
        let p = &layout.placements;
        let rects: Vec<_> = p
            .iter()
            .map(|q| (q.shrinked.x, q.shrinked.y, q.shrinked.w, q.shrinked.h))
            .collect();
        let sizes_ok = p.iter().enumerate().all(|(i, q)| {
            q.index == i && (q.shrinked.w, q.shrinked.h) == (shrinked[i].w, shrinked[i].h)
        });
        let in_bounds = rects
            .iter()
            .all(|r| r.0 + r.2 <= layout.scene_w && r.1 + r.3 <= layout.scene_h);
        let overlaps = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !disjoint(rects[i], rects[j]))
            .count();
        if p.len() != n || !sizes_ok || !in_bounds || overlaps > 0 || layout.scene_h > h_hat {
            failures.push(case);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "packing validity fuzz",
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "1000 instances, {} invalid, {:.2} s (limit 60 s)",
            failures.len(),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn orientation_ratio() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let theta = Orientation::new(1.2).unwrap();
    let (mut ratio_sum, mut overhead_sum) = (0.0, 0.0);
    let scenes = 1000;
    for _ in 0..scenes {
        let n = rng.random_range(1..=32);
        let orig: Vec<RectSize> = (0..n)
            .map(|_| RectSize::new(rng.random_range(64..=512), rng.random_range(64..=512)))
            .collect();
        let shrinked = shrink(&orig, Shrinkage::default());
        let h = height_limit(&shrinked, &orig, theta).unwrap();
        let layout = realize(&pack(&shrinked, h).unwrap(), &orig);
        ratio_sum += layout.scene_w as f64 / layout.scene_h as f64;
        let area = layout.scene_w as f64 * layout.scene_h as f64;
        let used: f64 = shrinked.iter().map(|r| r.w as f64 * r.h as f64).sum();
        overhead_sum += (area - used) / area;
    }
    let ratio = ratio_sum / scenes as f64;
    let overhead = overhead_sum / scenes as f64;
    verdict(
        "orientation ratio",
        (1.05..=1.35).contains(&ratio) && overhead <= 0.30,
        format!(
            "theta 1.2, {scenes} scenes, mean W/H {ratio:.4} (bounds [1.05, 1.35]), \
             mean area overhead {overhead:.4} (bound 0.30)"
        ),
    );
}

#[test]
fn formula_exactness() {
    let mut bad = Vec::new();
    let mut check = |what: String, ok: bool| {
        if !ok {
            bad.push(what);
        }
    };

    // Worked examples.
    let sq = |w, h| RectSize::new(w, h);
    for (input, k, expect) in [
        (sq(100, 100), 100, sq(90, 90)),
        (sq(200, 140), 0, sq(200, 140)),
        (sq(200, 200), 300, sq(140, 140)),
    ] {
        let got = shrink(&[input], Shrinkage::new(k as f64 / 1000.0).unwrap())[0];
        check(
            format!("shrink {input:?} k={k}"),
            got == expect
                && (got.w, got.h) == (shrink_oracle(input.w, k), shrink_oracle(input.h, k)),
        );
    }
    let hs = |v: &[u32]| v.iter().map(|&h| sq(10, h)).collect::<Vec<_>>();
    for (heights, t, expect) in [
        (hs(&[100, 50, 80, 70]), 100, 150),
        (hs(&[200]), 100, 200),
        (hs(&[100; 4]), 120, 240),
    ] {
        let got = height_limit(
            &heights,
            &heights,
            Orientation::new(t as f64 / 100.0).unwrap(),
        )
        .unwrap();
        check(
            format!("height limit {t}"),
            got == expect && got == height_limit_oracle(&heights, &heights, t),
        );
    }
    let mem = MemoryModelParams {
        n: 2.0,
        masks: 3.0,
        pack_overhead: 1.0,
        aux_overhead: 2.0,
        overhead_const: 0.0,
        mean_h: 100.0,
        mean_w: 100.0,
    };
    check(
        "memory worked example".into(),
        estimate_memory(&mem).unwrap() == 480_000.0,
    );

    // Random points on decimal grids against integer evaluation.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20_000 {
        let d = rng.random_range(1..=4096);
        let k = rng.random_range(0..1000u64);
        let got = shrink(&[sq(d, d)], Shrinkage::new(k as f64 / 1000.0).unwrap())[0].w;
        check(format!("shrink d={d} k={k}"), got == shrink_oracle(d, k));
    }
    for _ in 0..20_000 {
        let n = rng.random_range(1..=64);
        let orig: Vec<RectSize> = (0..n).map(|_| sq(10, rng.random_range(1..=1000))).collect();
        let k = rng.random_range(0..1000u64);
        let t = rng.random_range(1..=500u64);
        let shrinked = shrink(&orig, Shrinkage::new(k as f64 / 1000.0).unwrap());
        let got = height_limit(
            &shrinked,
            &orig,
            Orientation::new(t as f64 / 100.0).unwrap(),
        )
        .unwrap();
        check(
            format!("height limit n={n} k={k} t={t}"),
            got == height_limit_oracle(&shrinked, &orig, t),
        );
    }
    for _ in 0..20_000 {
        let (n, m, p, o, c, h, w) = (
            rng.random_range(0..=64u64),
            rng.random_range(0..=5u64),
            rng.random_range(0..=4u64),
            rng.random_range(0..=4u64),
            rng.random_range(0..=1_000_000u64),
            rng.random_range(1..=1024u64),
            rng.random_range(1..=1024u64),
        );
        let expect = 3 * n * h * w * ((1 + m) * p + o + 2) + c;
        let got = estimate_memory(&MemoryModelParams {
            n: n as f64,
            masks: m as f64,
            pack_overhead: p as f64,
            aux_overhead: o as f64,
            overhead_const: c as f64,
            mean_h: h as f64,
            mean_w: w as f64,
        })
        .unwrap();
        check(
            format!("memory {n} {m} {p} {o} {c} {h} {w}"),
            got == expect as f64,
        );
    }

    verdict(
        "shrink / height limit / memory exactness",
        bad.is_empty(),
        format!(
            "worked examples and 60000 grid points, {} mismatches (tolerance 0){}",
            bad.len(),
            bad.first()
                .map(|b| format!(", first: {b}"))
                .unwrap_or_default()
        ),
    );
}

#[test]
fn color_generation() {
    let mut bad = Vec::new();
    for n in 1..=500usize {
        let a = generate_colors(n).unwrap();
        let b = generate_colors(n).unwrap();
        let l = (1u64..).find(|l| l.pow(3) >= n as u64 + 2).unwrap();
        let exact: HashSet<[u64; 3]> = a
            .iter()
            .map(|c| [c.r, c.g, c.b].map(f64::to_bits))
            .collect();
        let quantized: HashSet<[u8; 3]> = a.iter().map(|c| c.to_rgb8().0).collect();
        let ok = a.len() == n
            && a == b
            && exact.len() == n
            && quantized.len() == n
            && !quantized.contains(&[255, 255, 255])
            && !quantized.contains(&[0, 0, 0])
            && a.iter()
                .all(|c| [c.r, c.g, c.b].iter().all(|v| *v > 0.0 && *v <= 1.0))
            && l.pow(3) - 2 >= n as u64;
        if !ok {
            bad.push(n);
        }
    }
    verdict(
        "color generation",
        bad.is_empty(),
        format!("n in [1, 500]: distinct, quantized distinct, no white/black, L^3 - 2 >= n candidates, deterministic; failing n: {bad:?}"),
    );
}

struct MaskReport {
    scenes: usize,
    problems: Vec<String>,
}

fn check_scene(bundle: &SceneBundle, s_zero: bool, tag: &str, r: &mut MaskReport) {
    r.scenes += 1;
    let mut fail = |msg: String| r.problems.push(format!("{tag}: {msg}"));

    // (a) one foreground support shared by every mask kind.
    let supports: Vec<(MaskKind, Vec<bool>)> = bundle
        .masks
        .iter()
        .map(|(k, m)| (*k, common::support(m)))
        .collect();
    let (k0, s0) = &supports[0];
    for (k, s) in &supports[1..] {
        if s != s0 {
            fail(format!("support of {k} differs from {k0}"));
        }
    }

    // (b) object colors in MO against the registry and class counts.
    let mo = &bundle.masks[&MaskKind::MultiObject];
    let colors = common::foreground_colors(mo);
    let n = bundle.object_count();
    let visible = bundle.registry.iter().filter(|o| !o.occluded).count();
    let counted: usize = bundle.counts.values().sum();
    let registry_colors: HashSet<[u8; 3]> = bundle
        .registry
        .iter()
        .filter(|o| !o.occluded)
        .map(|o| o.mo_color)
        .collect();
    if colors.len() != visible
        || colors != registry_colors
        || counted != n
        || bundle.layout.placements.len() != n
    {
        fail(format!(
            "MO colors {} visible {visible} objects {n} counted {counted}",
            colors.len()
        ));
    }
    if s_zero && visible != n {
        fail(format!("{} objects occluded at s=0", n - visible));
    }

    // (c) boxes tight against MO pixels.
    let mut extent: BTreeMap<[u8; 3], (u32, u32, u32, u32)> = BTreeMap::new();
    for (x, y, p) in mo.enumerate_pixels() {
        if is_foreground(p) {
            let e = extent.entry(p.0).or_insert((x, y, x, y));
            *e = (e.0.min(x), e.1.min(y), e.2.max(x), e.3.max(y));
        }
    }
    for (o, b) in bundle.registry.iter().zip(&bundle.boxes) {
        if o.occluded {
            continue;
        }
        let e = extent[&o.mo_color];
        if (b.x, b.y, b.right() - 1, b.bottom() - 1) != e {
            fail(format!("box {b:?} not tight against {e:?}"));
        }
    }

    // (d) at s=0 real footprints are disjoint and every object stays inside its own.
    if s_zero {
        let real: Vec<_> = bundle
            .layout
            .placements
            .iter()
            .map(|p| (p.real.x, p.real.y, p.real.w, p.real.h))
            .collect();
        for i in 0..real.len() {
            for j in i + 1..real.len() {
                if !disjoint(real[i], real[j]) {
                    fail(format!("objects {i} and {j} overlap"));
                }
            }
        }
        for (o, r) in bundle.registry.iter().zip(&real) {
            let e = extent[&o.mo_color];
            if e.0 < r.0 || e.1 < r.1 || e.2 >= r.0 + r.2 || e.3 >= r.1 + r.3 {
                fail(format!("object pixels {e:?} leave footprint {r:?}"));
            }
        }
    }
}

#[test]
fn mask_consistency() {
    let tmp = tempfile::tempdir().unwrap();
    let classes = [("leaf", 5), ("stem", 4), ("bud", 3)];
    let mp = common::write_corpus(&tmp.path().join("mp"), MaskKind::MultiPart, &classes, 21);
    let sema = common::write_corpus(&tmp.path().join("sema"), MaskKind::Semantic, &classes, 22);
    let bgs = common::write_backgrounds(&tmp.path().join("bg"), 4, 23);

    let mut report = MaskReport {
        scenes: 0,
        problems: Vec::new(),
    };
    for (input, kind) in [(mp, MaskKind::MultiPart), (sema, MaskKind::Semantic)] {
        for s in [0.0, 0.2] {
            let cfg = GeneratorConfig {
                n_per_scene: 7,
                num_scenes: 25,
                input_kind: kind,
                outputs: MaskSet::from([
                    MaskKind::Single,
                    MaskKind::MultiObject,
                    kind,
                    MaskKind::Class,
                ]),
                emit_boxes: true,
                input_dir: input.clone(),
                background_dir: Some(bgs.clone()),
                seed: 31,
                transform: TransformConfig {
                    shrinkage: Shrinkage::new(s).unwrap(),
                    perspective: 0.3,
                    ..TransformConfig::default()
                },
                ..Default::default()
            };
            for (k, bundle) in SceneStream::bounded(cfg).unwrap().enumerate() {
                check_scene(
                    &bundle.unwrap(),
                    s == 0.0,
                    &format!("{kind} s={s} scene {k}"),
                    &mut report,
                );
            }
        }
    }
    verdict(
        "mask consistency",
        report.scenes == 100 && report.problems.is_empty(),
        format!(
            "{} scenes with S, MO, MP/Sema and C: shared supports, MO color count, tight boxes, disjoint objects at s=0; {} problems{}",
            report.scenes,
            report.problems.len(),
            report.problems.first().map(|p| format!(", first: {p}")).unwrap_or_default()
        ),
    );
}

#[test]
fn stream_offline_equivalence() {
    let tmp = tempfile::tempdir().unwrap();
    let input = common::write_corpus(
        &tmp.path().join("in"),
        MaskKind::MultiPart,
        &[("a", 4), ("b", 4)],
        41,
    );
    let bgs = common::write_backgrounds(&tmp.path().join("bg"), 3, 42);
    let cfg = GeneratorConfig {
        n_per_scene: 6,
        num_scenes: 25,
        input_kind: MaskKind::MultiPart,
        outputs: MaskSet::from([
            MaskKind::Single,
            MaskKind::MultiObject,
            MaskKind::MultiPart,
            MaskKind::Class,
        ]),
        emit_boxes: true,
        input_dir: input,
        background_dir: Some(bgs),
        output_dir: tmp.path().join("out"),
        seed: 7,
        jobs: 2,
        transform: TransformConfig {
            noise: 30.0,
            salt: 0.01,
            pepper: 0.01,
            smooth: 3,
            perspective: 0.4,
            ..TransformConfig::default()
        },
        ..Default::default()
    };
    generate_offline(&cfg).unwrap();
    let digest = cfg.digest();

    let mut mismatches = Vec::new();
    let stream = SceneStream::bounded(GeneratorConfig {
        prefetch: 4,
        ..cfg.clone()
    })
    .unwrap();
    let mut streamed = 0;
    for (k, bundle) in stream.enumerate() {
        streamed += 1;
        let bundle = bundle.unwrap();
        let dir = cfg.output_dir.join(scene_dir_name(k as u64));
        let mut pairs = vec![("image".to_string(), &bundle.image, dir.join("image.png"))];
        for (kind, m) in &bundle.masks {
            pairs.push((
                format!("mask {kind}"),
                m,
                dir.join(format!("mask_{}.png", kind.code())),
            ));
        }
        for (what, img, path) in pairs {
            if common::pixel_digest(img) != common::pixel_digest(&common::load_rgb(&path)) {
                mismatches.push(format!("scene {k} {what}"));
            }
        }
        let json = Annotations::from_bundle(&bundle, cfg.emit_boxes, &digest).to_json();
        if json != fs::read_to_string(dir.join("annotations.json")).unwrap() {
            mismatches.push(format!("scene {k} annotations"));
        }
    }
    verdict(
        "stream/offline equivalence",
        streamed == 25 && mismatches.is_empty(),
        format!(
            "{streamed} scenes, seed 7, pixel and annotation checksums, mismatches: {mismatches:?}"
        ),
    );
}

#[test]
fn time_linearity() {
    let _g = serial();
    let tmp = tempfile::tempdir().unwrap();
    let input = common::write_corpus(
        &tmp.path().join("in"),
        MaskKind::MultiPart,
        &[("a", 6), ("b", 6)],
        51,
    );
    let bgs = common::write_backgrounds(&tmp.path().join("bg"), 3, 52);
    let counts = vec![1, 2, 4, 8, 16];
    let spec = BenchSpec {
        base: GeneratorConfig {
            input_kind: MaskKind::MultiPart,
            input_dir: input,
            background_dir: Some(bgs),
            seed: 3,
            ..Default::default()
        },
        object_counts: counts.clone(),
        scenes_per_point: 20,
        features: FeatureSet::ALL.to_vec(),
    };
    let rows = benchmark(&spec).unwrap();
    let xs: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
    let total = |f: FeatureSet, n: usize| {
        rows.iter()
            .find(|r| r.features == f && r.n == n)
            .unwrap()
            .total_ms()
    };

    let mut fits = Vec::new();
    for f in FeatureSet::ALL {
        let ys: Vec<f64> = counts.iter().map(|&n| total(f, n)).collect();
        fits.push((f, linear_fit_r2(&xs, &ys)));
    }
    let ordered: Vec<usize> = counts
        .iter()
        .copied()
        .filter(|&n| {
            total(FeatureSet::Full, n) >= total(FeatureSet::Noisy, n)
                && total(FeatureSet::Noisy, n) >= total(FeatureSet::Simple, n)
        })
        .collect();
    let linear = fits.iter().all(|(_, r2)| *r2 >= 0.9);
    let fit_text: Vec<String> = fits
        .iter()
        .map(|(f, r2)| format!("{f} R2 {r2:.4}"))
        .collect();
    let table: Vec<String> = counts
        .iter()
        .map(|&n| {
            format!(
                "n={n}: {:.1}/{:.1}/{:.1} ms",
                total(FeatureSet::Simple, n),
                total(FeatureSet::Noisy, n),
                total(FeatureSet::Full, n)
            )
        })
        .collect();
    verdict(
        "time linearity",
        linear && ordered == counts,
        format!(
            "{} (bound 0.9); NMA >= NA >= SA holds for n in {ordered:?}; SA/NA/NMA {}",
            fit_text.join(", "),
            table.join(", ")
        ),
    );
}

#[test]
fn segmentation_dataset_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let input = common::write_corpus(
        &tmp.path().join("in"),
        MaskKind::Single,
        &[("a", 4), ("b", 3)],
        61,
    );
    let bgs = common::write_backgrounds(&tmp.path().join("bg"), 2, 62);
    let out = tmp.path().join("dataset");
    let cfg = GeneratorConfig {
        num_scenes: 12,
        input_dir: input,
        background_dir: Some(bgs),
        output_dir: out.clone(),
        seed: 9,
        ..Default::default()
    };
    generate_offline(&cfg).unwrap();

    let mut problems = Vec::new();
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let mut dirs: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    dirs.sort();
    if dirs != manifest.scenes || dirs.len() != 12 {
        problems.push(format!(
            "manifest lists {} scenes, {} on disk",
            manifest.scenes.len(),
            dirs.len()
        ));
    }
    for d in &dirs {
        let image = image::open(out.join(d).join("image.png"));
        let mask = image::open(out.join(d).join("mask_S.png"));
        let (Ok(image), Ok(mask)) = (image, mask) else {
            problems.push(format!("{d}: unreadable pair"));
            continue;
        };
        let mask = mask.to_rgb8();
        if (image.width(), image.height()) != (mask.width(), mask.height()) {
            problems.push(format!("{d}: size mismatch"));
        }
        if !mask
            .pixels()
            .all(|p| p.0 == [0, 0, 0] || p.0 == [255, 255, 255])
        {
            problems.push(format!("{d}: mask not binary"));
        }
        if !mask.pixels().any(|p| p.0 == [255, 255, 255]) {
            problems.push(format!("{d}: empty mask"));
        }
    }
    verdict(
        "segmentation dataset",
        problems.is_empty(),
        format!("{} scene dirs with image.png + binary mask_S.png of equal size, all in manifest; problems: {problems:?}", dirs.len()),
    );
}
