/// A feature vector `x_t`, stored densely or as sorted active indices.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureVector {
    Dense(Vec<f64>),
    Sparse {
        dim: usize,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

impl FeatureVector {
    pub fn dense(dim: usize) -> Self {
        FeatureVector::Dense(vec![0.0; dim])
    }

    pub fn sparse(dim: usize) -> Self {
        FeatureVector::Sparse {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FeatureVector::Dense(v) => v.len(),
            FeatureVector::Sparse { dim, .. } => *dim,
        }
    }

    pub(crate) fn dense_values_mut(&mut self) -> &mut [f64] {
        match self {
            FeatureVector::Dense(v) => v,
            FeatureVector::Sparse { .. } => panic!("expected a dense feature vector"),
        }
    }

    /// Clears a sparse vector so entries can be pushed in increasing order.
    pub(crate) fn sparse_clear(&mut self) -> (&mut Vec<usize>, &mut Vec<f64>) {
        match self {
            FeatureVector::Sparse {
                indices, values, ..
            } => {
                indices.clear();
                values.clear();
                (indices, values)
            }
            FeatureVector::Dense(_) => panic!("expected a sparse feature vector"),
        }
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        debug_assert_eq!(w.len(), self.dim());
        match self {
            FeatureVector::Dense(v) => v.iter().zip(w).map(|(a, b)| a * b).sum(),
            FeatureVector::Sparse {
                indices, values, ..
            } => indices.iter().zip(values).map(|(&i, v)| w[i] * v).sum(),
        }
    }

    /// `out += scale * self`.
    pub fn add_scaled_to(&self, scale: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        match self {
            FeatureVector::Dense(v) => {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += scale * x;
                }
            }
            FeatureVector::Sparse {
                indices, values, ..
            } => {
                for (&i, v) in indices.iter().zip(values) {
                    out[i] += scale * v;
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.add_scaled_to(1.0, &mut out);
        out
    }

    /// Overwrites `self` with `other`, reusing the allocation when the
    /// storage kinds agree.
    pub fn copy_from(&mut self, other: &FeatureVector) {
        match (self, other) {
            (FeatureVector::Dense(a), FeatureVector::Dense(b)) if a.len() == b.len() => {
                a.copy_from_slice(b)
            }
            (
                FeatureVector::Sparse {
                    dim,
                    indices,
                    values,
                },
                FeatureVector::Sparse {
                    dim: d2,
                    indices: i2,
                    values: v2,
                },
            ) => {
                *dim = *d2;
                indices.clone_from(i2);
                values.clone_from(v2);
            }
            (this, other) => *this = other.clone(),
        }
    }

    /// Number of structurally nonzero entries.
    pub fn active(&self) -> usize {
        match self {
            FeatureVector::Dense(v) => v.iter().filter(|x| **x != 0.0).count(),
            FeatureVector::Sparse { indices, .. } => indices.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_and_dense_agree() {
        let s = FeatureVector::Sparse {
            dim: 5,
            indices: vec![1, 4],
            values: vec![2.0, 1.0],
        };
        let d = FeatureVector::Dense(s.to_dense());
        let w = [0.5, -1.0, 3.0, 0.0, 2.0];
        assert_eq!(s.dot(&w), d.dot(&w));
        let mut a = vec![1.0; 5];
        let mut b = vec![1.0; 5];
        s.add_scaled_to(0.5, &mut a);
        d.add_scaled_to(0.5, &mut b);
        assert_eq!(a, b);
        assert_eq!(s.active(), 2);
    }
}
