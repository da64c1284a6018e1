use proptest::prelude::*;
use sceneforge::packing::{
    height_limit, pack, real_overlap_area, realize, shrink, Orientation, PackedLayout, RectSize,
    Shrinkage,
};

fn rects(max_n: usize, lo: u32, hi: u32) -> impl Strategy<Value = Vec<RectSize>> {
    prop::collection::vec(
        (lo..=hi, lo..=hi).prop_map(|(w, h)| RectSize::new(w, h)),
        1..=max_n,
    )
}

fn assert_valid(layout: &PackedLayout, h_max: u32) {
    let p = &layout.placements;
    for (i, a) in p.iter().enumerate() {
        assert_eq!(a.index, i);
        assert!(a.shrinked.right() <= layout.scene_w && a.shrinked.bottom() <= layout.scene_h);
        for b in &p[i + 1..] {
            assert!(!a.shrinked.intersects(&b.shrinked), "{a:?} overlaps {b:?}");
        }
    }
    assert!(layout.scene_h <= h_max);
}

fn layout_for(orig: &[RectSize], s: f64, theta: f64) -> (PackedLayout, u32) {
    let shrinked = shrink(orig, Shrinkage::new(s).unwrap());
    let h = height_limit(&shrinked, orig, Orientation::new(theta).unwrap()).unwrap();
    (pack(&shrinked, h).unwrap(), h)
}

proptest! {
    #[test]
    fn shrinked_rects_never_overlap(orig in rects(32, 1, 300), s in 0.0..0.9f64, theta in 0.3..3.0f64) {
        let (layout, h) = layout_for(&orig, s, theta);
        assert_valid(&layout, h);
        // Realization shifts but never changes the shrinked arrangement.
        let real = realize(&layout, &orig);
        for (a, b) in layout.placements.iter().zip(&real.placements) {
            prop_assert_eq!(a.shrinked.size(), b.shrinked.size());
            prop_assert!(b.real.right() <= real.scene_w && b.real.bottom() <= real.scene_h);
            prop_assert_eq!(b.real.size(), orig[b.index]);
        }
    }

    #[test]
    fn no_shrinkage_means_no_overlap(orig in rects(24, 1, 200), theta in 0.3..3.0f64) {
        let (layout, _) = layout_for(&orig, 0.0, theta);
        let real = realize(&layout, &orig);
        prop_assert_eq!(&real, &layout);
        prop_assert_eq!(real_overlap_area(&real), 0);
    }

    // s on a 1/1000 grid so the rounding can be checked in integers.
    #[test]
    fn shrink_matches_rounded_product(orig in rects(8, 1, 2000), k in 0u64..1000) {
        let out = shrink(&orig, Shrinkage::new(k as f64 / 1000.0).unwrap());
        for (o, r) in orig.iter().zip(&out) {
            let expect = |d: u32| ((((1000 - k) * d as u64 + 500) / 1000) as u32).max(1);
            prop_assert_eq!((r.w, r.h), (expect(o.w), expect(o.h)));
            prop_assert!(r.w <= o.w && r.h <= o.h);
        }
    }

    #[test]
    fn height_limit_covers_tallest(orig in rects(32, 1, 500), s in 0.0..0.9f64, theta in 0.1..4.0f64) {
        let shrinked = shrink(&orig, Shrinkage::new(s).unwrap());
        let h = height_limit(&shrinked, &orig, Orientation::new(theta).unwrap()).unwrap();
        prop_assert!(orig.iter().all(|r| r.h <= h));
    }
}

// Equal squares keep one arrangement up to scale, so the growth of the
// overlap with s is isolated from layout changes.
#[test]
fn overlap_grows_with_shrinkage_on_uniform_squares() {
    for n in [2usize, 3, 4, 6, 9] {
        for side in [40u32, 64, 100] {
            let orig = vec![RectSize::new(side, side); n];
            let mut last = 0;
            for step in 0..=6 {
                let s = step as f64 * 0.05;
                let (layout, _) = layout_for(&orig, s, 1.0);
                let overlap = real_overlap_area(&realize(&layout, &orig));
                assert!(
                    overlap >= last,
                    "n={n} side={side} s={s}: {overlap} < {last}"
                );
                last = overlap;
            }
        }
    }
}
