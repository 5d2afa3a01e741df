//! Phase-space points and 3x3 matrices.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// A point (or velocity) in three-dimensional phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State {
    pub const ZERO: State = State { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        State { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, other: &State) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &State) -> State {
        State {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array([x, y, z]: [f64; 3]) -> Self {
        State { x, y, z }
    }
}

impl Index<usize> for State {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("state index {i} out of range"),
        }
    }
}

impl IndexMut<usize> for State {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("state index {i} out of range"),
        }
    }
}

impl Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        State::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for State {
    type Output = State;
    fn sub(self, o: State) -> State {
        State::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for State {
    type Output = State;
    fn neg(self) -> State {
        State::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for State {
    type Output = State;
    fn mul(self, k: f64) -> State {
        State::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Mul<State> for f64 {
    type Output = State;
    fn mul(self, s: State) -> State {
        s * self
    }
}

/// Row-major 3x3 matrix; row = equation index, column = variable index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix3 {
    pub rows: [[f64; 3]; 3],
}

impl Matrix3 {
    pub const ZERO: Matrix3 = Matrix3 { rows: [[0.0; 3]; 3] };

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Matrix3 { rows }
    }

    pub fn identity() -> Self {
        Matrix3::from_rows([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().flatten().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        self.rows[0][0] + self.rows[1][1] + self.rows[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.rows;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Sum of the three principal 2x2 minors (the second elementary
    /// symmetric function of the eigenvalues).
    pub fn minor_sum(&self) -> f64 {
        let m = &self.rows;
        (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
            + (m[0][0] * m[1][1] - m[0][1] * m[1][0])
    }

    pub fn mul_vec(&self, v: &State) -> State {
        let m = &self.rows;
        State::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// Solve M u = b by Gaussian elimination with partial pivoting.
    /// Returns None when the pivot underflows (singular matrix).
    pub fn solve(&self, b: &State) -> Option<State> {
        let mut m = self.rows;
        let mut rhs = b.to_array();
        for col in 0..3 {
            let mut pivot = col;
            for row in col + 1..3 {
                if m[row][col].abs() > m[pivot][col].abs() {
                    pivot = row;
                }
            }
            if m[pivot][col].abs() < 1e-300 {
                return None;
            }
            m.swap(col, pivot);
            rhs.swap(col, pivot);
            for row in col + 1..3 {
                let f = m[row][col] / m[col][col];
                for k in col..3 {
                    m[row][k] -= f * m[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
        let mut u = [0.0; 3];
        for row in (0..3).rev() {
            let mut acc = rhs[row];
            for k in row + 1..3 {
                acc -= m[row][k] * u[k];
            }
            u[row] = acc / m[row][row];
        }
        let sol = State::from_array(u);
        sol.is_finite().then_some(sol)
    }
}

impl Index<(usize, usize)> for Matrix3 {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.rows[r][c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_product_is_orthogonal() {
        let u = State::new(1.0, 2.0, 3.0);
        let v = State::new(-0.5, 4.0, 1.5);
        let w = u.cross(&v);
        assert!(w.dot(&u).abs() < 1e-12);
        assert!(w.dot(&v).abs() < 1e-12);
    }

    #[test]
    fn solve_recovers_known_solution() {
        let m = Matrix3::from_rows([[2.0, 1.0, -1.0], [-3.0, -1.0, 2.0], [-2.0, 1.0, 2.0]]);
        let u = State::new(2.0, 3.0, -1.0);
        let b = m.mul_vec(&u);
        let got = m.solve(&b).unwrap();
        assert!((got - u).norm() < 1e-12);
    }

    #[test]
    fn solve_rejects_singular() {
        let m = Matrix3::from_rows([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]);
        assert!(m.solve(&State::new(1.0, 2.0, 3.0)).is_none());
    }

    #[test]
    fn det_and_trace() {
        let m = Matrix3::from_rows([[1.0, 2.0, 0.0], [0.0, 3.0, 1.0], [4.0, 0.0, 2.0]]);
        assert_eq!(m.trace(), 6.0);
        assert!((m.det() - 14.0).abs() < 1e-12);
    }
}
