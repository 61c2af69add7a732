//! Complex matrix helpers shared by the chaos and RIP code.

use nalgebra::{Complex, DMatrix};
use serde_json::Value;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Parses a JSON 2-D array whose entries are numbers or `[re, im]` pairs.
pub fn matrix_from_json(value: &Value) -> Result<CMatrix> {
    let rows = value.as_array().ok_or_else(|| Error::Shape("matrix must be a JSON array of rows".into()))?;
    let mut entries = Vec::new();
    let mut cols = None;
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| Error::Shape(format!("row {i} is not an array")))?;
        if *cols.get_or_insert(row.len()) != row.len() {
            return Err(Error::Shape(format!("row {i} has {} entries, expected {}", row.len(), cols.unwrap())));
        }
        for (j, e) in row.iter().enumerate() {
            entries.push(entry_from_json(e).ok_or_else(|| Error::Shape(format!("entry ({i}, {j}) is not a number or [re, im] pair")))?);
        }
    }
    let cols = cols.unwrap_or(0);
    Ok(CMatrix::from_row_slice(rows.len(), cols, &entries))
}

fn entry_from_json(e: &Value) -> Option<C64> {
    if let Some(x) = e.as_f64() {
        return Some(C64::new(x, 0.0));
    }
    match e.as_array()?.as_slice() {
        [re, im] => Some(C64::new(re.as_f64()?, im.as_f64()?)),
        _ => None,
    }
}

/// `[re, im]` pairs row by row.
pub fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

/// Serde adapter for a list of matrices in the JSON layout of [`matrix_from_json`].
pub mod matrix_list {
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::Value;

    use super::{matrix_from_json, matrix_to_json, CMatrix};

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        let raw = Vec::<Value>::deserialize(d)?;
        raw.iter().map(|v| matrix_from_json(v).map_err(D::Error::custom)).collect()
    }
}

pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, &data.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Schatten norm for finite q, operator norm for `q = ∞`.
pub fn schatten_norm(m: &CMatrix, q: f64) -> f64 {
    let sv = singular_values(m);
    if q.is_infinite() {
        sv.into_iter().fold(0.0, f64::max)
    } else {
        sv.iter().map(|s| s.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_columns(&order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect::<Vec<_>>());
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_norms() {
        let i4 = CMatrix::identity(4, 4);
        assert!((schatten_norm(&i4, 2.0) - 2.0).abs() < 1e-12);
        assert!((schatten_norm(&i4, 4.0) - 2f64.sqrt()).abs() < 1e-12);
        assert!((schatten_norm(&i4, f64::INFINITY) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let v: Value = serde_json::from_str("[[1, [0, 2]], [3.5, -1]]").unwrap();
        let m = matrix_from_json(&v).unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.0, 2.0));
        assert_eq!(matrix_from_json(&matrix_to_json(&m)).unwrap(), m);
        assert!(matrix_from_json(&serde_json::from_str("[[1, 2], [3]]").unwrap()).is_err());
    }

    #[test]
    fn eigen_sorted() {
        let m = real_matrix(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let v = vecs.column(1);
        assert!((v[0].norm() - v[1].norm()).abs() < 1e-12);
    }
}
