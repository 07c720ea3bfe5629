//! Exact solver for the small zero-sum stage games: the row player (R)
//! minimizes, the column player (N) maximizes the entries.
//!
//! Pipeline: iterated strict dominance elimination, closed forms for a
//! single surviving row or column, then support enumeration with linear
//! solves in lexicographic support order. Every returned solution is
//! checked against the minimax certificate on the full matrix.

use crate::engine::Move;

use super::SolverError;

/// Strict-dominance margin; comparisons closer than this are treated as
/// ties and never eliminated.
const DOM_EPS: f64 = 1e-12;
/// Equality slack for pure saddle-point detection.
const SADDLE_TOL: f64 = 1e-11;
/// Allowed negativity on solved mix weights before rejection.
const NEG_TOL: f64 = 1e-9;
/// Slack on off-support best-response inequalities and the final
/// certificate.
const CERT_TOL: f64 = 1e-9;

/// A stage game: one row per available R move, three columns (N's moves),
/// entries are payoffs to the maximizing column player.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGame {
    rows: Vec<Move>,
    payoffs: Vec<[f64; 3]>,
}

impl MatrixGame {
    pub fn new(rows: Vec<Move>, payoffs: Vec<[f64; 3]>) -> Result<MatrixGame, SolverError> {
        if rows.is_empty() || rows.len() > 3 || rows.len() != payoffs.len() {
            return Err(SolverError::InvalidMatrix(format!(
                "need 1..=3 rows with matching payoffs, got {} rows x {} payoff rows",
                rows.len(),
                payoffs.len()
            )));
        }
        if payoffs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(SolverError::InvalidMatrix("non-finite payoff".into()));
        }
        Ok(MatrixGame { rows, payoffs })
    }

    pub fn rows(&self) -> &[Move] {
        &self.rows
    }

    pub fn payoffs(&self) -> &[[f64; 3]] {
        &self.payoffs
    }
}

/// Minimax value with optimal mixes for both players.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSolution {
    pub value: f64,
    /// Probabilities over the game's rows (the minimizer).
    pub row_mix: Vec<f64>,
    /// Probabilities over the three columns (the maximizer).
    pub col_mix: [f64; 3],
}

impl GameSolution {
    /// Minimax certificate: the row mix guarantees at most `value` against
    /// every column, and the column mix at least `value` against every row.
    pub fn certifies(&self, game: &MatrixGame, tol: f64) -> bool {
        certify(
            game.payoffs(),
            self.value,
            &self.row_mix,
            &self.col_mix,
            tol,
        )
    }
}

fn certify(p: &[[f64; 3]], value: f64, row_mix: &[f64], col_mix: &[f64; 3], tol: f64) -> bool {
    let m = p.len();
    let worst_col = (0..3)
        .map(|j| (0..m).map(|i| row_mix[i] * p[i][j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut worst_row = f64::INFINITY;
    for row in p {
        let s: f64 = (0..3).map(|j| col_mix[j] * row[j]).sum();
        worst_row = worst_row.min(s);
    }
    worst_col <= value + tol && worst_row >= value - tol
}

/// Gaussian elimination with partial pivoting on systems of size <= 4.
#[allow(clippy::needless_range_loop)] // forward elimination reads one row while updating another
fn gauss(a: &mut [[f64; 4]; 4], b: &mut [f64; 4], n: usize) -> Option<[f64; 4]> {
    let scale = a
        .iter()
        .take(n)
        .flat_map(|r| r.iter().take(n))
        .fold(1.0f64, |acc, x| acc.max(x.abs()));
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            for j in col..n {
                a[i][j] -= f * a[col][j];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

/// Bitmasks over up to three positions, grouped by popcount; ascending
/// masks enumerate subsets in lexicographic order of their positions.
const MASKS_BY_SIZE: [&[u8]; 4] = [
    &[],
    &[0b001, 0b010, 0b100],
    &[0b011, 0b101, 0b110],
    &[0b111],
];

/// Expands `mask` over `items` into `buf`; returns the filled prefix.
fn expand_mask<'a>(items: &[usize], mask: u8, buf: &'a mut [usize; 3]) -> &'a [usize] {
    let mut len = 0;
    for (k, &item) in items.iter().enumerate() {
        if mask >> k & 1 == 1 {
            buf[len] = item;
            len += 1;
        }
    }
    &buf[..len]
}

struct Candidate {
    value: f64,
    row_mix: [f64; 3],
    col_mix: [f64; 3],
}

/// Solves for equal-support mixes on (`sr`, `sc`); returns a candidate only
/// if it satisfies feasibility and the off-support best-response
/// inequalities over the alive rows and columns. `strictness` scales every
/// acceptance tolerance: the enumeration first demands near-exact
/// solutions and relaxes only when nothing qualifies, so near-degenerate
/// small supports cannot shave the value by an accepted-slack amount.
#[allow(clippy::too_many_arguments)]
fn try_support(
    p: &[[f64; 3]],
    alive_rows: &[usize],
    alive_cols: &[usize],
    sr: &[usize],
    sc: &[usize],
    scale: f64,
    strictness: f64,
) -> Option<Candidate> {
    let s = sr.len();
    let slack = CERT_TOL * scale * strictness;
    let neg_tol = NEG_TOL * strictness;
    let saddle_tol = SADDLE_TOL * scale * strictness;

    if s == 1 {
        let (i, j) = (sr[0], sc[0]);
        let v = p[i][j];
        let row_best = alive_rows.iter().all(|&i2| p[i2][j] >= v - saddle_tol);
        let col_best = alive_cols.iter().all(|&j2| p[i][j2] <= v + saddle_tol);
        if !(row_best && col_best) {
            return None;
        }
        let mut row_mix = [0.0; 3];
        row_mix[i] = 1.0;
        let mut col_mix = [0.0; 3];
        col_mix[j] = 1.0;
        return Some(Candidate {
            value: v,
            row_mix,
            col_mix,
        });
    }

    // Row system: the minimizer's weights equalize every supported column.
    let mut a = [[0.0; 4]; 4];
    let mut b = [0.0; 4];
    for (jj, &j) in sc.iter().enumerate() {
        for (k, &i) in sr.iter().enumerate() {
            a[jj][k] = p[i][j];
        }
        a[jj][s] = -1.0;
    }
    a[s][..s].fill(1.0);
    b[s] = 1.0;
    let xv = gauss(&mut a, &mut b, s + 1)?;
    let value = xv[s];
    if xv[..s].iter().any(|&x| x < -neg_tol) {
        return None;
    }

    // Column system: the maximizer's weights equalize every supported row.
    let mut a = [[0.0; 4]; 4];
    let mut b = [0.0; 4];
    for (ii, &i) in sr.iter().enumerate() {
        for (k, &j) in sc.iter().enumerate() {
            a[ii][k] = p[i][j];
        }
        a[ii][s] = -1.0;
    }
    a[s][..s].fill(1.0);
    b[s] = 1.0;
    let yv = gauss(&mut a, &mut b, s + 1)?;
    if (yv[s] - value).abs() > slack || yv[..s].iter().any(|&y| y < -neg_tol) {
        return None;
    }

    // Off-support strategies must not improve either player.
    for &j in alive_cols.iter().filter(|j| !sc.contains(j)) {
        let payoff: f64 = sr.iter().enumerate().map(|(k, &i)| xv[k] * p[i][j]).sum();
        if payoff > value + slack {
            return None;
        }
    }
    for &i in alive_rows.iter().filter(|i| !sr.contains(i)) {
        let payoff: f64 = sc.iter().enumerate().map(|(k, &j)| yv[k] * p[i][j]).sum();
        if payoff < value - slack {
            return None;
        }
    }

    let mut row_mix = [0.0; 3];
    for (k, &i) in sr.iter().enumerate() {
        row_mix[i] = xv[k].max(0.0);
    }
    let rsum: f64 = row_mix.iter().sum();
    row_mix.iter_mut().for_each(|x| *x /= rsum);
    let mut col_mix = [0.0; 3];
    for (k, &j) in sc.iter().enumerate() {
        col_mix[j] = yv[k].max(0.0);
    }
    let csum: f64 = col_mix.iter().sum();
    col_mix.iter_mut().for_each(|y| *y /= csum);

    // Polish the value as the bilinear form of the computed mixes: at a
    // saddle point mix errors enter the value only at second order, which
    // keeps roundoff from compounding across DP layers.
    let mut polished = 0.0;
    for &i in sr {
        for &j in sc {
            polished += row_mix[i] * col_mix[j] * p[i][j];
        }
    }
    if (polished - value).abs() > slack {
        return None;
    }

    Some(Candidate {
        value: polished,
        row_mix,
        col_mix,
    })
}

/// Core solve on raw payoffs (rows x 3). Returns the value and both mixes;
/// the row mix is padded to three entries, of which the first `p.len()`
/// are meaningful.
#[allow(clippy::needless_range_loop)] // dominance loops mutate the alive masks they scan
pub(super) fn solve_raw(p_orig: &[[f64; 3]]) -> Result<(f64, [f64; 3], [f64; 3]), SolverError> {
    let m = p_orig.len();
    debug_assert!((1..=3).contains(&m));
    // Solve the centered game: deep in the DP the continuation offset
    // dwarfs the per-round payoffs and would dominate the conditioning of
    // the linear systems. A uniform shift moves the value by the shift and
    // changes nothing else.
    let shift = p_orig.iter().flatten().sum::<f64>() / (3 * m) as f64;
    let mut shifted = [[0.0f64; 3]; 3];
    for i in 0..m {
        for j in 0..3 {
            shifted[i][j] = p_orig[i][j] - shift;
        }
    }
    let p = &shifted[..m];
    let scale = p.iter().flatten().fold(1.0f64, |acc, x| acc.max(x.abs()));

    let mut row_alive = [true; 3];
    let mut col_alive = [true; 3];

    // Iterated strict dominance. Strict only: ties are kept so optimal
    // supports are never deleted.
    loop {
        let mut changed = false;
        for i in 0..m {
            if !row_alive[i] {
                continue;
            }
            let dominated = (0..m).any(|i2| {
                i2 != i
                    && row_alive[i2]
                    && (0..3)
                        .filter(|&j| col_alive[j])
                        .all(|j| p[i2][j] < p[i][j] - DOM_EPS * scale)
            });
            if dominated {
                row_alive[i] = false;
                changed = true;
            }
        }
        for j in 0..3 {
            if !col_alive[j] {
                continue;
            }
            let dominated = (0..3).any(|j2| {
                j2 != j
                    && col_alive[j2]
                    && (0..m)
                        .filter(|&i| row_alive[i])
                        .all(|i| p[i][j2] > p[i][j] + DOM_EPS * scale)
            });
            if dominated {
                col_alive[j] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut rows_buf = [0usize; 3];
    let mut cols_buf = [0usize; 3];
    let mut nr = 0;
    let mut nc = 0;
    for i in 0..m {
        if row_alive[i] {
            rows_buf[nr] = i;
            nr += 1;
        }
    }
    for j in 0..3 {
        if col_alive[j] {
            cols_buf[nc] = j;
            nc += 1;
        }
    }
    let alive_rows = &rows_buf[..nr];
    let alive_cols = &cols_buf[..nc];

    let finish = |value: f64, row_mix: [f64; 3], col_mix: [f64; 3]| {
        if certify(p, value, &row_mix[..m], &col_mix, CERT_TOL * scale) {
            Ok((value + shift, row_mix, col_mix))
        } else {
            Err(SolverError::DegenerateMatrix)
        }
    };

    // Closed forms once one side is down to a single strategy.
    if nr == 1 {
        let i = alive_rows[0];
        let &j = alive_cols
            .iter()
            .max_by(|&&a, &&b| p[i][a].total_cmp(&p[i][b]))
            .unwrap();
        let mut row_mix = [0.0; 3];
        row_mix[i] = 1.0;
        let mut col_mix = [0.0; 3];
        col_mix[j] = 1.0;
        return finish(p[i][j], row_mix, col_mix);
    }
    if nc == 1 {
        let j = alive_cols[0];
        let &i = alive_rows
            .iter()
            .min_by(|&&a, &&b| p[a][j].total_cmp(&p[b][j]))
            .unwrap();
        let mut row_mix = [0.0; 3];
        row_mix[i] = 1.0;
        let mut col_mix = [0.0; 3];
        col_mix[j] = 1.0;
        return finish(p[i][j], row_mix, col_mix);
    }

    // Support enumeration, largest supports first, lexicographic within a
    // size; the 2x2 case is the closed form expressed as a linear solve.
    // Larger supports are preferred because equal-support equalizer mixes
    // are insensitive to the continuation offsets, so in stage games that
    // are degenerate to machine precision (pure saddle and mixed optimum
    // tie, e.g. lopsided two-choice states whose gap decays like 3^-k)
    // the returned mix stays the equalizing one. Two passes: near-exact
    // acceptance first, the contract tolerance as a fallback for genuinely
    // degenerate ties.
    let mut sr_buf = [0usize; 3];
    let mut sc_buf = [0usize; 3];
    for strictness in [1e-3, 1.0] {
        for s in (1..=nr.min(nc)).rev() {
            for &mr in MASKS_BY_SIZE[s] {
                if mr as usize >= 1 << nr {
                    continue;
                }
                for &mc in MASKS_BY_SIZE[s] {
                    if mc as usize >= 1 << nc {
                        continue;
                    }
                    let sr = expand_mask(alive_rows, mr, &mut sr_buf);
                    let sc = expand_mask(alive_cols, mc, &mut sc_buf);
                    if let Some(c) =
                        try_support(p, alive_rows, alive_cols, sr, sc, scale, strictness)
                    {
                        let tol = CERT_TOL * scale * strictness;
                        if certify(p, c.value, &c.row_mix[..m], &c.col_mix, tol) {
                            return Ok((c.value + shift, c.row_mix, c.col_mix));
                        }
                    }
                }
            }
        }
    }
    Err(SolverError::DegenerateMatrix)
}

/// Exact minimax value and optimal mixes of one stage game.
pub fn solve_matrix_game(game: &MatrixGame) -> Result<GameSolution, SolverError> {
    let (value, row_mix, col_mix) = solve_raw(game.payoffs())?;
    Ok(GameSolution {
        value,
        row_mix: row_mix[..game.payoffs().len()].to_vec(),
        col_mix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rps_payoffs() -> Vec<[f64; 3]> {
        vec![[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]]
    }

    fn game(payoffs: Vec<[f64; 3]>) -> MatrixGame {
        let rows = Move::ALL[..payoffs.len()].to_vec();
        MatrixGame::new(rows, payoffs).unwrap()
    }

    #[test]
    fn unrestricted_rps_is_fair_and_uniform() {
        let sol = solve_matrix_game(&game(rps_payoffs())).unwrap();
        assert!(sol.value.abs() < 1e-12);
        for x in &sol.row_mix {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
        for y in &sol.col_mix {
            assert!((y - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_choice_stage_game() {
        // R restricted to Rock and Paper.
        let sol = solve_matrix_game(&game(vec![[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0]])).unwrap();
        assert!((sol.value - 1.0 / 3.0).abs() < 1e-12);
        assert!((sol.row_mix[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((sol.row_mix[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!(sol.col_mix[0].abs() < 1e-12);
        assert!((sol.col_mix[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((sol.col_mix[2] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_two_row_game() {
        // Value 4/3: verified by the grid-search oracle in verify::tests.
        let sol = solve_matrix_game(&game(vec![[1.0, 2.0, 0.0], [0.0, 1.0, 2.0]])).unwrap();
        assert!((sol.value - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_row_picks_best_column() {
        let sol = solve_matrix_game(&game(vec![[0.0, 1.0, -1.0]])).unwrap();
        assert_eq!(sol.value, 1.0);
        assert_eq!(sol.col_mix, [0.0, 1.0, 0.0]);
        assert_eq!(sol.row_mix, vec![1.0]);
    }

    #[test]
    fn dominated_row_is_never_played() {
        // Row 1 is strictly worse for the minimizer everywhere.
        let sol = solve_matrix_game(&game(vec![[1.0, 0.0, -1.0], [2.0, 3.0, 1.0]])).unwrap();
        assert_eq!(sol.value, 1.0);
        assert_eq!(sol.row_mix, vec![1.0, 0.0]);
    }

    #[test]
    fn identical_rows_find_saddle() {
        let sol = solve_matrix_game(&game(vec![[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]])).unwrap();
        assert_eq!(sol.value, 1.0);
    }

    #[test]
    fn certificate_rejects_wrong_value() {
        let g = game(rps_payoffs());
        let mut sol = solve_matrix_game(&g).unwrap();
        assert!(sol.certifies(&g, 1e-9));
        sol.value = 0.5;
        assert!(!sol.certifies(&g, 1e-9));
    }

    fn pure_bounds(p: &[[f64; 3]]) -> (f64, f64) {
        // maxmin over columns <= value <= minmax over rows
        let maxmin = (0..3)
            .map(|j| p.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max);
        let minmax = p
            .iter()
            .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::INFINITY, f64::min);
        (maxmin, minmax)
    }

    proptest! {
        #[test]
        fn random_games_certify(
            raw in prop::collection::vec(prop::array::uniform3(-20i32..=20), 1..=3)
        ) {
            let payoffs: Vec<[f64; 3]> =
                raw.iter().map(|r| [r[0] as f64 / 4.0, r[1] as f64 / 4.0, r[2] as f64 / 4.0]).collect();
            let g = game(payoffs.clone());
            let sol = solve_matrix_game(&g).unwrap();
            prop_assert!(sol.certifies(&g, 1e-7));
            let (lo, hi) = pure_bounds(&payoffs);
            prop_assert!(sol.value >= lo - 1e-9 && sol.value <= hi + 1e-9);
            let rs: f64 = sol.row_mix.iter().sum();
            let cs: f64 = sol.col_mix.iter().sum();
            prop_assert!((rs - 1.0).abs() < 1e-9 && (cs - 1.0).abs() < 1e-9);
        }
    }
}
