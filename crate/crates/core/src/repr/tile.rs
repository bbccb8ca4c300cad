use super::FeatureVector;

/// Traces below this value activate no tiles.
pub const TILE_THRESHOLD: f64 = 0.01;

/// One-dimensional tile coding of each trace in `[0, 1]`.
///
/// Tiling `i` is shifted by `i / (n_tilings * n_tiles)`; the last tile of each
/// tiling is closed at 1. Feature index for channel `c`, tiling `i`, tile `k`
/// is `(c * n_tilings + i) * n_tiles + k`, followed by the bias.
pub fn tile_coded_features(traces: &[f64], n_tilings: usize, n_tiles: usize) -> FeatureVector {
    let mut out = FeatureVector::sparse(traces.len() * n_tilings * n_tiles + 1);
    tile_coded_features_into(traces, n_tilings, n_tiles, &mut out);
    out
}

pub fn tile_coded_features_into(
    traces: &[f64],
    n_tilings: usize,
    n_tiles: usize,
    out: &mut FeatureVector,
) {
    debug_assert!(n_tilings >= 1 && n_tiles >= 2);
    let dim = traces.len() * n_tilings * n_tiles + 1;
    debug_assert_eq!(out.dim(), dim);
    let (indices, values) = out.sparse_clear();
    let width = n_tiles as f64;
    let shift = 1.0 / (n_tilings * n_tiles) as f64;
    for (c, &y) in traces.iter().enumerate() {
        if y < TILE_THRESHOLD {
            continue;
        }
        for i in 0..n_tilings {
            let pos = ((y + i as f64 * shift) * width).floor() as usize;
            let tile = pos.min(n_tiles - 1);
            indices.push((c * n_tilings + i) * n_tiles + tile);
            values.push(1.0);
        }
    }
    indices.push(dim - 1);
    values.push(1.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn active(x: &FeatureVector) -> Vec<usize> {
        match x {
            FeatureVector::Sparse { indices, .. } => indices.clone(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn examples() {
        assert_eq!(active(&tile_coded_features(&[0.5], 1, 8)), vec![4, 8]);
        assert_eq!(active(&tile_coded_features(&[0.005], 1, 8)), vec![8]);
        assert_eq!(active(&tile_coded_features(&[1.0], 1, 8)), vec![7, 8]);
        // Second tiling shifted by 1/16.
        assert_eq!(active(&tile_coded_features(&[0.47], 2, 8)), vec![3, 8 + 4, 16]);
    }

    proptest! {
        #[test]
        fn one_tile_per_tiling_above_threshold(
            ys in proptest::collection::vec(0.0f64..=1.0, 1..6),
            n_tilings in 1usize..4,
            n_tiles in 2usize..17,
        ) {
            let x = tile_coded_features(&ys, n_tilings, n_tiles);
            let idx = active(&x);
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(*idx.last().unwrap(), x.dim() - 1);
            for (c, &y) in ys.iter().enumerate() {
                let block = c * n_tilings * n_tiles..(c + 1) * n_tilings * n_tiles;
                let n = idx.iter().filter(|i| block.contains(i)).count();
                prop_assert_eq!(n, if y >= TILE_THRESHOLD { n_tilings } else { 0 });
            }
        }
    }
}
