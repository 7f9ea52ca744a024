//! Homogeneous self-dual embedding interior-point engine.
//!
//! Works on the compiled real conic form
//! `min c^T x  s.t.  A x = b tau,  G x + s = h tau,  s in K,  tau, kappa >= 0`
//! with K a product of realified PSD blocks. Directions use Nesterov-Todd
//! scaling with a Mehrotra predictor-corrector; each iteration factors one
//! KKT saddle system and reuses the factorization for three solves. Every
//! quantity is deterministic: fixed initialization, no randomized pivoting.

use super::compile::{hermitian_basis_element, hermitian_from_coords, Compiled, VarLayout};
use super::realsym::*;
use super::{
    RayCertificate, SdpProblem, SdpSolution, SdpStatus, SolveOptions, VarKind, VarValue,
};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator};
use std::collections::BTreeMap;

const STEP_SCALE: f64 = 0.99;

fn trace_enabled() -> bool {
    std::env::var_os("DIMENQ_SOLVER_TRACE").is_some_and(|v| v != "0")
}

struct Scaling {
    /// Factor with `gw^{-1} S gw^{-T} = gw^T Z gw = diag(lambda)`.
    gw: RealMat,
    gw_inv: RealMat,
    lambda: Vec<f64>,
}

struct State {
    x: Vec<f64>,
    y: Vec<f64>,
    s: Vec<RealMat>,
    z: Vec<RealMat>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    ds: Vec<RealMat>,
    dz: Vec<RealMat>,
    dtau: f64,
    dkappa: f64,
}

fn mat_inner(a: &RealMat, b: &RealMat) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum()
}

fn g_mul(comp: &Compiled, x: &[f64]) -> Vec<Vec<f64>> {
    comp.blocks
        .iter()
        .map(|bl| {
            let mut out = vec![0.0; svec_len(bl.m)];
            for (col, seg) in &bl.cols {
                let xv = x[*col];
                if xv != 0.0 {
                    for (o, s) in out.iter_mut().zip(seg) {
                        *o += xv * s;
                    }
                }
            }
            out
        })
        .collect()
}

fn gt_mul(comp: &Compiled, z: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; comp.n];
    for (bl, zb) in comp.blocks.iter().zip(z) {
        for (col, seg) in &bl.cols {
            out[*col] += dot(seg, zb);
        }
    }
    out
}

fn a_mul(comp: &Compiled, x: &[f64]) -> Vec<f64> {
    let p = comp.eq_b.len();
    let mut out = vec![0.0; p];
    for r in 0..p {
        let row = &comp.eq_a.data[r * comp.n..(r + 1) * comp.n];
        out[r] = dot(row, x);
    }
    out
}

fn at_mul(comp: &Compiled, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; comp.n];
    for (r, yr) in y.iter().enumerate() {
        if *yr != 0.0 {
            let row = &comp.eq_a.data[r * comp.n..(r + 1) * comp.n];
            for (o, a) in out.iter_mut().zip(row) {
                *o += yr * a;
            }
        }
    }
    out
}

/// `W^{-1} X W^{-1}` for one block.
fn winv_congr(sc: &Scaling, x: &RealMat) -> RealMat {
    sc.gw_inv.transpose().matmul(&sc.gw_inv.matmul(x).matmul(&sc.gw_inv.transpose())).matmul(&sc.gw_inv)
}

/// Solve `(Lambda o) X = D` entrywise: `X_ij = 2 D_ij / (lambda_i + lambda_j)`.
fn jordan_solve(lambda: &[f64], d: &RealMat) -> RealMat {
    let m = d.rows;
    RealMat::from_fn(m, m, |i, j| 2.0 * d[(i, j)] / (lambda[i] + lambda[j]))
}

fn nt_scaling(s: &RealMat, z: &RealMat) -> Option<Scaling> {
    let l = cholesky_lower(s).or_else(|| cholesky_jitter(s))?;
    // Lambda^2 and V from the PD matrix L^T Z L.
    let ltzl = l.transpose().matmul(z).matmul(&l);
    let (evals, v) = jacobi_eigh(&ltzl);
    if evals.iter().any(|&e| e <= 0.0 || !e.is_finite()) {
        return None;
    }
    let lambda: Vec<f64> = evals.iter().map(|e| e.sqrt()).collect();
    let lv = l.matmul(&v);
    let m = s.rows;
    let mut gw = RealMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gw[(i, j)] = lv[(i, j)] / lambda[j].sqrt();
        }
    }
    let linv = invert_lower(&l);
    // gw_inv = diag(lambda^{1/2}) V^T L^{-1}
    let vt_linv = v.transpose().matmul(&linv);
    let mut gw_inv = RealMat::zeros(m, m);
    for i in 0..m {
        let f = lambda[i].sqrt();
        for j in 0..m {
            gw_inv[(i, j)] = f * vt_linv[(i, j)];
        }
    }
    Some(Scaling { gw, gw_inv, lambda })
}

/// Solve with iterative refinement; the KKT systems become badly conditioned
/// near convergence and each refinement pass buys several digits. The dual
/// update amplifies direction errors by roughly 1/mu, so the extra passes are
/// what keep late iterations meaningful.
fn solve_refined(kkt: &RealMat, factor: &LuFactor, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut u = factor.solve(rhs);
    let mut prev_norm = f64::INFINITY;
    for _ in 0..3 {
        let mut resid = vec![0.0; n];
        for i in 0..n {
            let row = &kkt.data[i * n..(i + 1) * n];
            resid[i] = rhs[i] - dot(row, &u);
        }
        let rnorm = norm2(&resid);
        if !rnorm.is_finite() || rnorm >= prev_norm || rnorm == 0.0 {
            break;
        }
        prev_norm = rnorm;
        let corr = factor.solve(&resid);
        for i in 0..n {
            u[i] += corr[i];
        }
    }
    u
}

fn cholesky_jitter(a: &RealMat) -> Option<RealMat> {
    let mut b = a.clone();
    let scale = a.max_abs().max(1e-300);
    for i in 0..b.rows {
        b[(i, i)] += 1e-12 * scale;
    }
    cholesky_lower(&b)
}

/// Largest step `alpha` keeping `M + alpha * dM_bar` PSD in the scaled space
/// where `M_bar = diag(lambda)`.
fn max_step_block(lambda: &[f64], dbar: &RealMat) -> f64 {
    let m = dbar.rows;
    let norm = RealMat::from_fn(m, m, |i, j| dbar[(i, j)] / (lambda[i] * lambda[j]).sqrt());
    let rho = min_eig(&norm);
    if rho >= -1e-300 {
        f64::INFINITY
    } else {
        -1.0 / rho
    }
}

pub fn solve_compiled(problem: &SdpProblem, comp: &Compiled, opts: &SolveOptions) -> Result<SdpSolution> {
    if comp.n == 0 {
        return solve_constant(problem, comp, opts);
    }

    let nu: f64 = comp.blocks.iter().map(|b| b.m as f64).sum::<f64>() + 1.0;
    let p = comp.eq_b.len();
    let norm_b = norm2(&comp.eq_b).max(1.0);
    let norm_c = norm2(&comp.c).max(1.0);
    let norm_h: f64 = comp
        .blocks
        .iter()
        .map(|b| dot(&b.h, &b.h))
        .sum::<f64>()
        .sqrt()
        .max(1.0);

    let mut st = State {
        x: vec![0.0; comp.n],
        y: vec![0.0; p],
        s: comp.blocks.iter().map(|b| RealMat::identity(b.m)).collect(),
        z: comp.blocks.iter().map(|b| RealMat::identity(b.m)).collect(),
        tau: 1.0,
        kappa: 1.0,
    };

    let mut best: Option<(f64, SdpSolution)> = None;
    let mut iterations = 0;
    let mut tiny_steps = 0usize;
    let mut stalled = 0usize;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        // Residuals.
        let zvec: Vec<Vec<f64>> = st.z.iter().map(svec).collect();
        let svecs: Vec<Vec<f64>> = st.s.iter().map(svec).collect();
        let gtz = gt_mul(comp, &zvec);
        let aty = at_mul(comp, &st.y);
        let rx: Vec<f64> = (0..comp.n).map(|i| aty[i] + gtz[i] + comp.c[i] * st.tau).collect();
        let ax = a_mul(comp, &st.x);
        let ry: Vec<f64> = (0..p).map(|i| ax[i] - comp.eq_b[i] * st.tau).collect();
        let gx = g_mul(comp, &st.x);
        let rz: Vec<Vec<f64>> = comp
            .blocks
            .iter()
            .enumerate()
            .map(|(bi, bl)| {
                (0..svec_len(bl.m))
                    .map(|k| gx[bi][k] + svecs[bi][k] - bl.h[k] * st.tau)
                    .collect()
            })
            .collect();
        let hz: f64 = comp.blocks.iter().zip(&zvec).map(|(bl, zb)| dot(&bl.h, zb)).sum();
        let by = dot(&comp.eq_b, &st.y);
        let cx = dot(&comp.c, &st.x);
        let rtau = cx + by + hz + st.kappa;

        let compl: f64 = st.s.iter().zip(&st.z).map(|(s, z)| mat_inner(s, z)).sum();
        let mu = (compl + st.tau * st.kappa) / nu;

        // Convergence metrics at the de-homogenized point.
        let pcost = cx / st.tau;
        let dcost = (-by - hz) / st.tau;
        let pres = {
            let nry = norm2(&ry) / norm_b;
            let nrz: f64 = rz.iter().map(|r| dot(r, r)).sum::<f64>().sqrt() / norm_h;
            nry.max(nrz) / st.tau
        };
        let dres = norm2(&rx) / norm_c / st.tau;
        let cgap = compl / (st.tau * st.tau);
        let vgap = (pcost - dcost).abs();
        let relgap = cgap.max(vgap) / pcost.abs().max(1.0);

        if trace_enabled() {
            eprintln!(
                "iter {iter:3}  mu {mu:9.2e}  pres {pres:9.2e}  dres {dres:9.2e}  relgap {relgap:9.2e}  tau {:9.2e}  kappa {:9.2e}  pcost {pcost:12.6e}",
                st.tau, st.kappa
            );
        }

        if pres <= opts.feas_tol && dres <= 1000.0 * opts.feas_tol && relgap <= opts.gap_tol {
            return Ok(build_solution(problem, comp, &st, SdpStatus::Optimal, iter, None));
        }

        // Infeasibility certificates.
        let slope = hz + by;
        if slope < -1e-12 {
            let theta = -1.0 / slope;
            let stat: f64 = (0..comp.n).map(|i| (aty[i] + gtz[i]).powi(2)).sum::<f64>().sqrt();
            if stat * theta <= opts.feas_tol * norm_c {
                let cert = infeasibility_certificate(problem, comp, &st, theta);
                let mut sol = build_solution(problem, comp, &st, SdpStatus::Infeasible, iter, Some(cert));
                sol.primal_value = f64::NAN;
                sol.dual_value = f64::NAN;
                sol.gap = f64::NAN;
                return Ok(sol);
            }
        }
        if cx < -1e-12 {
            let theta = -1.0 / cx;
            let nax = norm2(&ax) * theta / norm_b;
            let ngxs: f64 = comp
                .blocks
                .iter()
                .enumerate()
                .map(|(bi, _)| {
                    (0..gx[bi].len()).map(|k| (gx[bi][k] + svecs[bi][k]).powi(2)).sum::<f64>()
                })
                .sum::<f64>()
                .sqrt()
                * theta
                / norm_h;
            if nax <= opts.feas_tol && ngxs <= opts.feas_tol {
                let ray = unpack_variables(problem, comp, &st.x, theta);
                let cert = RayCertificate::DualInfeasible { ray };
                let mut sol =
                    build_solution(problem, comp, &st, SdpStatus::Unbounded, iter, Some(cert));
                sol.primal_value = f64::NEG_INFINITY * if comp.flip { -1.0 } else { 1.0 };
                sol.dual_value = f64::NAN;
                sol.gap = f64::NAN;
                return Ok(sol);
            }
        }

        // Track the best iterate for an honest MaxIterations return.
        let score = pres.max(dres).max(relgap);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, build_solution(problem, comp, &st, SdpStatus::MaxIterations, iter, None)));
            stalled = 0;
        } else {
            stalled += 1;
        }

        if iter == opts.max_iter || stalled >= 15 || mu <= 1e-20 {
            break;
        }

        // Nesterov-Todd scalings.
        let mut scalings = Vec::with_capacity(comp.blocks.len());
        let mut scaling_failed = false;
        for (s, z) in st.s.iter().zip(&st.z) {
            match nt_scaling(s, z) {
                Some(sc) => scalings.push(sc),
                None => {
                    scaling_failed = true;
                    break;
                }
            }
        }
        if scaling_failed {
            break;
        }

        // KKT matrix [[H, A^T], [A, 0]] with H = G^T (W^{-1} . W^{-1}) G.
        let dim = comp.n + p;
        let mut kkt = RealMat::zeros(dim, dim);
        for (bi, bl) in comp.blocks.iter().enumerate() {
            let sc = &scalings[bi];
            // Congruence of each touching column, then pairwise dots.
            let transformed: Vec<Vec<f64>> = bl
                .cols
                .iter()
                .map(|(_, seg)| svec(&winv_congr(sc, &smat(seg, bl.m))))
                .collect();
            for (ia, (ca, sega)) in bl.cols.iter().enumerate() {
                let _ = sega;
                for (ib, (cb, segb)) in bl.cols.iter().enumerate() {
                    if cb > ca {
                        continue;
                    }
                    let _ = ib;
                    let v = dot(segb, &transformed[ia]);
                    kkt[(*ca, *cb)] += v;
                    if ca != cb {
                        kkt[(*cb, *ca)] += v;
                    }
                }
            }
        }
        for r in 0..p {
            for j in 0..comp.n {
                let v = comp.eq_a[(r, j)];
                kkt[(comp.n + r, j)] = v;
                kkt[(j, comp.n + r)] = v;
            }
        }
        let Some(factor) = LuFactor::factor(&kkt) else {
            return Err(Error::IllPosed(
                "KKT system is singular: the feasible set has no interior the solver can work in".into(),
            ));
        };

        // Shared quantities.
        let wih: Vec<RealMat> = comp
            .blocks
            .iter()
            .enumerate()
            .map(|(bi, bl)| winv_congr(&scalings[bi], &smat(&bl.h, bl.m)))
            .collect();
        let wih_svec: Vec<Vec<f64>> = wih.iter().map(svec).collect();
        let h_winv_h: f64 = comp.blocks.iter().zip(&wih_svec).map(|(bl, w)| dot(&bl.h, w)).sum();
        // u1 solves the tau-coefficient system.
        let gt_wih = gt_mul(comp, &wih_svec);
        let mut rhs1 = vec![0.0; dim];
        for i in 0..comp.n {
            rhs1[i] = gt_wih[i] - comp.c[i];
        }
        for r in 0..p {
            rhs1[comp.n + r] = comp.eq_b[r];
        }
        let u1 = solve_refined(&kkt, &factor, &rhs1);
        let (u1x, u1y) = u1.split_at(comp.n);
        let g_u1x = g_mul(comp, u1x);
        let h_winv_gu1: f64 = comp.blocks.iter().zip(&wih_svec).zip(&g_u1x).map(|((_, w), g)| dot(w, g)).sum();
        let denom = dot(&comp.c, u1x) + dot(&comp.eq_b, u1y) + h_winv_gu1 - h_winv_h
            - st.kappa / st.tau;
        if !denom.is_finite() || denom.abs() < 1e-300 {
            break;
        }

        let solve_direction = |gx_rhs: &[f64],
                               gy_rhs: &[f64],
                               gz_rhs: &[RealMat],
                               gtau_rhs: f64,
                               d_blocks: &[RealMat],
                               d_tau: f64|
         -> Direction {
            // E_b = gw X gw^T with X solving the Jordan equation for D.
            let e: Vec<RealMat> = comp
                .blocks
                .iter()
                .enumerate()
                .map(|(bi, _)| {
                    let sc = &scalings[bi];
                    sc.gw.matmul(&jordan_solve(&sc.lambda, &d_blocks[bi])).matmul(&sc.gw.transpose())
                })
                .collect();
            // E - gz per block, then W^{-1}(E - gz)W^{-1}.
            let emgz: Vec<RealMat> = e
                .iter()
                .zip(gz_rhs)
                .map(|(eb, gz)| {
                    let mut m = eb.clone();
                    for (d, g) in m.data.iter_mut().zip(&gz.data) {
                        *d -= g;
                    }
                    m
                })
                .collect();
            let winv_emgz: Vec<Vec<f64>> = comp
                .blocks
                .iter()
                .enumerate()
                .map(|(bi, _)| svec(&winv_congr(&scalings[bi], &emgz[bi])))
                .collect();
            let gt_we = gt_mul(comp, &winv_emgz);
            let mut rhs0 = vec![0.0; dim];
            for i in 0..comp.n {
                rhs0[i] = gx_rhs[i] - gt_we[i];
            }
            for r in 0..p {
                rhs0[comp.n + r] = gy_rhs[r];
            }
            let u0 = solve_refined(&kkt, &factor, &rhs0);
            let (u0x, u0y) = u0.split_at(comp.n);

            let g_u0x = g_mul(comp, u0x);
            let h_winv_gu0: f64 =
                comp.blocks.iter().zip(&wih_svec).zip(&g_u0x).map(|((_, w), g)| dot(w, g)).sum();
            let h_winv_emgz: f64 = comp
                .blocks
                .iter()
                .zip(&winv_emgz)
                .map(|(bl, w)| dot(&bl.h, w))
                .sum();
            let num = gtau_rhs - d_tau / st.tau
                - dot(&comp.c, u0x)
                - dot(&comp.eq_b, u0y)
                - h_winv_gu0
                - h_winv_emgz;
            let dtau = num / denom;

            let dx: Vec<f64> = (0..comp.n).map(|i| u0x[i] + dtau * u1x[i]).collect();
            let dy: Vec<f64> = (0..p).map(|i| u0y[i] + dtau * u1y[i]).collect();
            let g_dx = g_mul(comp, &dx);
            let mut ds = Vec::with_capacity(comp.blocks.len());
            let mut dz = Vec::with_capacity(comp.blocks.len());
            for (bi, bl) in comp.blocks.iter().enumerate() {
                let sc = &scalings[bi];
                // ds = gz + h*dtau - G dx
                let gz_vec = svec(&gz_rhs[bi]);
                let ds_vec: Vec<f64> = (0..svec_len(bl.m))
                    .map(|k| gz_vec[k] + bl.h[k] * dtau - g_dx[bi][k])
                    .collect();
                // dz = W^{-1}(G dx - h*dtau + E - gz)W^{-1}
                let inner_vec: Vec<f64> = (0..svec_len(bl.m))
                    .map(|k| g_dx[bi][k] - bl.h[k] * dtau)
                    .collect();
                let mut inner = smat(&inner_vec, bl.m);
                for (d, e) in inner.data.iter_mut().zip(&emgz[bi].data) {
                    *d += e;
                }
                ds.push(smat(&ds_vec, bl.m));
                dz.push(winv_congr(sc, &inner));
            }
            let dkappa = (d_tau - st.kappa * dtau) / st.tau;
            Direction { dx, dy, ds, dz, dtau, dkappa }
        };

        // Affine (predictor) direction: full residual reduction, sigma = 0.
        let gx_a: Vec<f64> = rx.iter().map(|v| -v).collect();
        let gy_a: Vec<f64> = ry.iter().map(|v| -v).collect();
        let gz_a: Vec<RealMat> = rz
            .iter()
            .enumerate()
            .map(|(bi, r)| smat(&r.iter().map(|v| -v).collect::<Vec<_>>(), comp.blocks[bi].m))
            .collect();
        let d_aff: Vec<RealMat> = scalings
            .iter()
            .map(|sc| {
                RealMat::from_fn(sc.lambda.len(), sc.lambda.len(), |i, j| {
                    if i == j {
                        -sc.lambda[i] * sc.lambda[i]
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        let aff = solve_direction(&gx_a, &gy_a, &gz_a, -rtau, &d_aff, -st.tau * st.kappa);

        // Scaled affine directions (reused for step length and corrector).
        let ds_bar_aff: Vec<RealMat> = (0..comp.blocks.len())
            .map(|bi| scalings[bi].gw_inv.congr(&aff.ds[bi]))
            .collect();
        let dz_bar_aff: Vec<RealMat> = (0..comp.blocks.len())
            .map(|bi| scalings[bi].gw.congr_t(&aff.dz[bi]))
            .collect();
        let mut alpha_aff = f64::INFINITY;
        for bi in 0..comp.blocks.len() {
            alpha_aff = alpha_aff.min(max_step_block(&scalings[bi].lambda, &ds_bar_aff[bi]));
            alpha_aff = alpha_aff.min(max_step_block(&scalings[bi].lambda, &dz_bar_aff[bi]));
        }
        if aff.dtau < 0.0 {
            alpha_aff = alpha_aff.min(-st.tau / aff.dtau);
        }
        if aff.dkappa < 0.0 {
            alpha_aff = alpha_aff.min(-st.kappa / aff.dkappa);
        }
        let alpha_aff = alpha_aff.min(1.0);

        // Mehrotra centering weight from the gap after the affine step.
        let mut gap_aff = (st.tau + alpha_aff * aff.dtau) * (st.kappa + alpha_aff * aff.dkappa);
        for bi in 0..comp.blocks.len() {
            gap_aff += mat_inner(&st.s[bi], &st.z[bi])
                + alpha_aff * (mat_inner(&aff.ds[bi], &st.z[bi]) + mat_inner(&st.s[bi], &aff.dz[bi]))
                + alpha_aff * alpha_aff * mat_inner(&aff.ds[bi], &aff.dz[bi]);
        }
        let sigma = ((gap_aff / nu) / mu).clamp(0.0, 1.0).powi(3);
        // Endgame: once the residuals are in, aim mu at the gap target
        // instead of overshooting into the region where float noise in the
        // scaled updates wrecks the dual residual.
        let sigma = if pres <= opts.feas_tol && dres <= 1000.0 * opts.feas_tol {
            let mu_target = 0.2 * opts.gap_tol * pcost.abs().max(1.0) * (st.tau * st.tau) / nu;
            if mu < 100.0 * mu_target {
                sigma.max((mu_target / mu).clamp(0.0, 0.99))
            } else {
                sigma
            }
        } else {
            sigma
        };

        // Combined (corrector) direction.
        let eta = 1.0 - sigma;
        let gx_c: Vec<f64> = rx.iter().map(|v| -eta * v).collect();
        let gy_c: Vec<f64> = ry.iter().map(|v| -eta * v).collect();
        let gz_c: Vec<RealMat> = rz
            .iter()
            .enumerate()
            .map(|(bi, r)| smat(&r.iter().map(|v| -eta * v).collect::<Vec<_>>(), comp.blocks[bi].m))
            .collect();
        let d_cmb: Vec<RealMat> = (0..comp.blocks.len())
            .map(|bi| {
                let lam = &scalings[bi].lambda;
                let m = lam.len();
                RealMat::from_fn(m, m, |i, j| {
                    let corr = 0.5
                        * (0..m)
                            .map(|k| {
                                ds_bar_aff[bi][(i, k)] * dz_bar_aff[bi][(k, j)]
                                    + dz_bar_aff[bi][(i, k)] * ds_bar_aff[bi][(k, j)]
                            })
                            .sum::<f64>();
                    let base = if i == j { sigma * mu - lam[i] * lam[i] } else { 0.0 };
                    base - corr
                })
            })
            .collect();
        let d_tau_c = sigma * mu - st.tau * st.kappa - aff.dtau * aff.dkappa;
        let dir = solve_direction(&gx_c, &gy_c, &gz_c, -eta * rtau, &d_cmb, d_tau_c);

        // Step length.
        let mut alpha = f64::INFINITY;
        for bi in 0..comp.blocks.len() {
            let dsb = scalings[bi].gw_inv.congr(&dir.ds[bi]);
            let dzb = scalings[bi].gw.congr_t(&dir.dz[bi]);
            alpha = alpha.min(max_step_block(&scalings[bi].lambda, &dsb));
            alpha = alpha.min(max_step_block(&scalings[bi].lambda, &dzb));
        }
        if dir.dtau < 0.0 {
            alpha = alpha.min(-st.tau / dir.dtau);
        }
        if dir.dkappa < 0.0 {
            alpha = alpha.min(-st.kappa / dir.dkappa);
        }
        let alpha = (STEP_SCALE * alpha).min(1.0);
        if alpha < 1e-7 {
            tiny_steps += 1;
            if tiny_steps >= 3 {
                return Err(Error::IllPosed(
                    "step length collapsed: the problem appears to have no strictly feasible interior \
                     or an unattained optimum"
                        .into(),
                ));
            }
        } else {
            tiny_steps = 0;
        }

        for i in 0..comp.n {
            st.x[i] += alpha * dir.dx[i];
        }
        for i in 0..p {
            st.y[i] += alpha * dir.dy[i];
        }
        for bi in 0..comp.blocks.len() {
            for (sv, dv) in st.s[bi].data.iter_mut().zip(&dir.ds[bi].data) {
                *sv += alpha * dv;
            }
            st.s[bi].symmetrize();
            for (zv, dv) in st.z[bi].data.iter_mut().zip(&dir.dz[bi].data) {
                *zv += alpha * dv;
            }
            st.z[bi].symmetrize();
        }
        st.tau += alpha * dir.dtau;
        st.kappa += alpha * dir.dkappa;

        // The embedding is homogeneous: renormalize the iterate ray when tau
        // drifts, so weakly attained problems keep making progress instead of
        // underflowing.
        if st.tau < 0.1 || st.tau > 10.0 {
            let inv = 1.0 / st.tau;
            for v in st.x.iter_mut() {
                *v *= inv;
            }
            for v in st.y.iter_mut() {
                *v *= inv;
            }
            for b in st.s.iter_mut() {
                for v in b.data.iter_mut() {
                    *v *= inv;
                }
            }
            for b in st.z.iter_mut() {
                for v in b.data.iter_mut() {
                    *v *= inv;
                }
            }
            st.kappa *= inv;
            st.tau = 1.0;
        }
    }

    // Iteration cap (or a scaling breakdown): return the best iterate seen.
    let (_, mut sol) = best.ok_or_else(|| Error::Solver("no iterate produced".into()))?;
    sol.iterations = iterations;
    Ok(sol)
}

/// Problems with no variables: every constraint is a constant.
fn solve_constant(problem: &SdpProblem, comp: &Compiled, opts: &SolveOptions) -> Result<SdpSolution> {
    for bl in &comp.blocks {
        let eig = min_eig(&smat(&bl.h, bl.m));
        if eig < -opts.feas_tol {
            // The violated block is its own certificate: project onto the
            // negative eigenspace.
            let con = &problem.constraints[bl.constraint];
            let val = HermitianOperator::new(con.expr.constant.clone())?;
            let e = val.eigh()?;
            let v = e.vectors.column(0);
            let y = HermitianOperator::projector(&v);
            let mut lmi = BTreeMap::new();
            lmi.insert(con.name.clone(), y);
            return Ok(SdpSolution {
                status: SdpStatus::Infeasible,
                primal_value: f64::NAN,
                dual_value: f64::NAN,
                gap: f64::NAN,
                variables: BTreeMap::new(),
                iterations: 0,
                certificate: Some(RayCertificate::PrimalInfeasible {
                    lmi_multipliers: lmi,
                    eq_multipliers: BTreeMap::new(),
                }),
            });
        }
    }
    let v = comp.obj_offset;
    Ok(SdpSolution {
        status: SdpStatus::Optimal,
        primal_value: v,
        dual_value: v,
        gap: 0.0,
        variables: BTreeMap::new(),
        iterations: 0,
        certificate: None,
    })
}

fn unpack_variables(
    problem: &SdpProblem,
    comp: &Compiled,
    x: &[f64],
    scale: f64,
) -> BTreeMap<String, VarValue> {
    let mut out = BTreeMap::new();
    for (decl, layout) in problem.vars.iter().zip(&comp.layouts) {
        let VarLayout { offset, kind } = layout;
        match kind {
            VarKind::Block(d) => {
                let coords: Vec<f64> = x[*offset..offset + d * d].iter().map(|v| v * scale).collect();
                out.insert(decl.name.clone(), VarValue::Matrix(hermitian_from_coords(*d, &coords)));
            }
            VarKind::Scalar => {
                out.insert(decl.name.clone(), VarValue::Scalar(x[*offset] * scale));
            }
        }
    }
    out
}

fn build_solution(
    problem: &SdpProblem,
    comp: &Compiled,
    st: &State,
    status: SdpStatus,
    iterations: usize,
    certificate: Option<RayCertificate>,
) -> SdpSolution {
    let inv_tau = 1.0 / st.tau;
    let variables = unpack_variables(problem, comp, &st.x, inv_tau);
    let cx = dot(&comp.c, &st.x) * inv_tau;
    let hz: f64 = comp
        .blocks
        .iter()
        .zip(&st.z)
        .map(|(bl, z)| dot(&bl.h, &svec(z)))
        .sum();
    let by = dot(&comp.eq_b, &st.y);
    let dual_raw = (-hz - by) * inv_tau;
    let sign = if comp.flip { -1.0 } else { 1.0 };
    let primal_value = sign * cx + comp.obj_offset;
    let dual_value = sign * dual_raw + comp.obj_offset;
    SdpSolution {
        status,
        primal_value,
        dual_value,
        gap: (primal_value - dual_value).abs(),
        variables,
        iterations,
        certificate,
    }
}

/// Map the scaled dual ray `(theta y, theta z)` back to complex multipliers.
fn infeasibility_certificate(
    problem: &SdpProblem,
    comp: &Compiled,
    st: &State,
    theta: f64,
) -> RayCertificate {
    let mut lmi = BTreeMap::new();
    for (bi, bl) in comp.blocks.iter().enumerate() {
        let name = problem.constraints[bl.constraint].name.clone();
        lmi.insert(name, derealify_multiplier(&st.z[bi], theta));
    }
    // Equality multipliers: Theta_j = -sum over kept rows of y_r B_component.
    let mut eq: BTreeMap<String, HermitianOperator> = BTreeMap::new();
    for (r, (cidx, comp_idx)) in comp.eq_rows_src.iter().enumerate() {
        let con = &problem.constraints[*cidx];
        let dim = con.expr.dim;
        let basis = hermitian_basis_element(dim, *comp_idx);
        let add = HermitianOperator::new(basis.scale_re(-st.y[r] * theta)).unwrap();
        eq.entry(con.name.clone())
            .and_modify(|acc| *acc = acc.add(&add))
            .or_insert(add);
    }
    RayCertificate::PrimalInfeasible { lmi_multipliers: lmi, eq_multipliers: eq }
}

/// De-embed a real symmetric 2m x 2m multiplier into the complex Hermitian
/// multiplier with the same pairings: `Y = (Z11 + Z22) + i (Z21 - Z12)`.
fn derealify_multiplier(z: &RealMat, scale: f64) -> HermitianOperator {
    let m = z.rows / 2;
    let out = ComplexMatrix::from_fn(m, m, |i, j| {
        num_complex::Complex64::new(
            (z[(i, j)] + z[(m + i, m + j)]) * scale,
            (z[(m + i, j)] - z[(i, m + j)]) * scale,
        )
    });
    HermitianOperator::new(out).expect("de-realified multiplier is Hermitian")
}
