//! Explicit Dormand–Prince 8th-order Runge–Kutta integrator with embedded
//! 5th/3rd-order error estimation, step-size control and 7th-order dense
//! output (Hairer's DOP853 tableau).
//!
//! The integrator runs in either time direction: the sign of the first
//! target relative to the current time fixes it.

#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

use super::OdeSystem;
use crate::error::{Error, Result};

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

/// Dense-output polynomial for one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep<const N: usize> {
    t0: f64,
    h: f64,
    coeffs: [[f64; N]; 8],
}

impl<const N: usize> DenseStep<N> {
    /// Cubic Hermite interpolant written in the same nested form, used by
    /// integrators that have no higher-order continuous extension.
    pub fn hermite(t0: f64, h: f64, y0: &[f64; N], f0: &[f64; N], y1: &[f64; N], f1: &[f64; N]) -> Self {
        let mut coeffs = [[0.0; N]; 8];
        for i in 0..N {
            let ydiff = y1[i] - y0[i];
            let bspl = h * f0[i] - ydiff;
            coeffs[0][i] = y0[i];
            coeffs[1][i] = ydiff;
            coeffs[2][i] = bspl;
            coeffs[3][i] = ydiff - h * f1[i] - bspl;
        }
        Self { t0, h, coeffs }
    }

    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolated state at `t` (meaningful for `t` inside the step).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.coeffs;
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = c[0][i]
                + s * (c[1][i]
                    + s1 * (c[2][i] + s * (c[3][i] + s1 * (c[4][i] + s * (c[5][i] + s1 * (c[6][i] + s * c[7][i]))))));
        }
        out
    }
}

/// Stage derivatives of one trial step, kept for the dense extension.
struct Stages<const N: usize> {
    k6: [f64; N],
    k7: [f64; N],
    k8: [f64; N],
    k9: [f64; N],
    k10: [f64; N],
    k11: [f64; N],
    k12: [f64; N],
    y_new: [f64; N],
    err: f64,
}

pub struct Dop853<'a, S, const N: usize> {
    sys: &'a S,
    t: f64,
    y: [f64; N],
    dydx: [f64; N],
    /// Signed proposal for the next step; zero until the first advance.
    h: f64,
    tol: Tolerances,
    steps: usize,
    reject: bool,
}

impl<'a, S: OdeSystem<N>, const N: usize> Dop853<'a, S, N> {
    pub fn new(sys: &'a S, t0: f64, y0: [f64; N], tol: Tolerances) -> Self {
        let dydx = sys.rhs(t0, &y0);
        Self { sys, t: t0, y: y0, dydx, h: 0.0, tol, steps: 0, reject: false }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64; N] {
        &self.y
    }

    pub fn derivative(&self) -> &[f64; N] {
        &self.dydx
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    /// Replaces the current state (e.g. after re-orthonormalization) while
    /// keeping the step-size history.
    pub fn reset_state(&mut self, y: [f64; N]) {
        self.y = y;
        self.dydx = self.sys.rhs(self.t, &y);
    }

    /// Integrates to exactly `t_end`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        self.run(t_end, None)
    }

    /// Integrates to exactly `t_end`, handing each accepted step's dense
    /// polynomial to `on_step`.
    pub fn advance_to_dense<F: FnMut(&DenseStep<N>)>(&mut self, t_end: f64, mut on_step: F) -> Result<()> {
        self.run(t_end, Some(&mut on_step))
    }

    fn run(&mut self, t_end: f64, mut on_step: Option<&mut dyn FnMut(&DenseStep<N>)>) -> Result<()> {
        let span = t_end - self.t;
        if span == 0.0 {
            return Ok(());
        }
        let dir = span.signum();
        if self.h == 0.0 || self.h.signum() != dir {
            self.h = dir * self.initial_step(dir, span.abs());
        }
        while (t_end - self.t) * dir > 0.0 {
            if self.steps >= self.tol.max_steps {
                return Err(Error::MaxStepsExceeded { max_steps: self.tol.max_steps, t: self.t });
            }
            let remaining = t_end - self.t;
            let proposal = self.h;
            let last = self.h.abs() >= remaining.abs();
            let mut h = if last { remaining } else { self.h };
            let stages = loop {
                if h.abs() < self.tol.min_step && !last {
                    return Err(Error::StepUnderflow { t: self.t, h });
                }
                let stages = self.attempt(h);
                match self.control(stages.err, h) {
                    None => break stages,
                    Some(h_new) => {
                        if h_new.abs() < self.tol.min_step {
                            return Err(Error::StepUnderflow { t: self.t, h: h_new });
                        }
                        h = h_new;
                    }
                }
            };
            self.steps += 1;
            let t_new = if h == remaining { t_end } else { self.t + h };
            let dydx_new = self.sys.rhs(t_new, &stages.y_new);
            if let Some(cb) = on_step.as_deref_mut() {
                let dense = self.dense(h, &stages, &dydx_new);
                cb(&dense);
            }
            self.t = t_new;
            self.y = stages.y_new;
            self.dydx = dydx_new;
            // A step clipped to land on t_end says nothing about the
            // attainable step size; keep the earlier proposal.
            if last && proposal.abs() > self.h.abs() {
                self.h = proposal;
            }
        }
        Ok(())
    }

    /// Hairer's starting-step heuristic for an order-8 method.
    fn initial_step(&self, dir: f64, h_max: f64) -> f64 {
        let scale = |i: usize| self.tol.abs_tol + self.tol.rel_tol * self.y[i].abs();
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..N {
            dnf += (self.dydx[i] / scale(i)).powi(2);
            dny += (self.y[i] / scale(i)).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { 0.01 * (dny / dnf).sqrt() };
        h = h.min(h_max);
        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = self.y[i] + dir * h * self.dydx[i];
        }
        let f1 = self.sys.rhs(self.t + dir * h, &y1);
        let mut der2 = 0.0;
        for i in 0..N {
            der2 += ((f1[i] - self.dydx[i]) / scale(i)).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der12).powf(1.0 / 8.0) };
        (100.0 * h).min(h1).min(h_max)
    }

    /// Step-size controller. `None` accepts the step and stores the next
    /// proposal; `Some(h)` rejects it and returns the retry size.
    fn control(&mut self, err: f64, h: f64) -> Option<f64> {
        const SAFE: f64 = 0.9;
        const MIN_SCALE: f64 = 0.333;
        const MAX_SCALE: f64 = 6.0;
        const ALPHA: f64 = 1.0 / 8.0;
        if err <= 1.0 {
            let mut scale = if err == 0.0 { MAX_SCALE } else { (SAFE * err.powf(-ALPHA)).clamp(MIN_SCALE, MAX_SCALE) };
            if self.reject {
                scale = scale.min(1.0);
            }
            self.h = h * scale;
            self.reject = false;
            None
        } else {
            self.reject = true;
            let scale = (SAFE * err.powf(-ALPHA)).max(MIN_SCALE);
            Some(h * scale)
        }
    }

    fn attempt(&self, h: f64) -> Stages<N> {
        let t = self.t;
        let y = &self.y;
        let k1 = &self.dydx;
        let f = |c: f64, yt: &[f64; N]| self.sys.rhs(t + c * h, yt);

        let k2 = f(C2, &combo(y, h, &[(A21, k1)]));
        let k3 = f(C3, &combo(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = f(C4, &combo(y, h, &[(A41, k1), (A43, &k3)]));
        let k5 = f(C5, &combo(y, h, &[(A51, k1), (A53, &k3), (A54, &k4)]));
        let k6 = f(C6, &combo(y, h, &[(A61, k1), (A64, &k4), (A65, &k5)]));
        let k7 = f(C7, &combo(y, h, &[(A71, k1), (A74, &k4), (A75, &k5), (A76, &k6)]));
        let k8 = f(C8, &combo(y, h, &[(A81, k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)]));
        let k9 = f(C9, &combo(y, h, &[(A91, k1), (A94, &k4), (A95, &k5), (A96, &k6), (A97, &k7), (A98, &k8)]));
        let k10 = f(
            C10,
            &combo(y, h, &[(A101, k1), (A104, &k4), (A105, &k5), (A106, &k6), (A107, &k7), (A108, &k8), (A109, &k9)]),
        );
        let k11 = f(
            C11,
            &combo(
                y,
                h,
                &[
                    (A111, k1),
                    (A114, &k4),
                    (A115, &k5),
                    (A116, &k6),
                    (A117, &k7),
                    (A118, &k8),
                    (A119, &k9),
                    (A1110, &k10),
                ],
            ),
        );
        let k12 = f(
            1.0,
            &combo(
                y,
                h,
                &[
                    (A121, k1),
                    (A124, &k4),
                    (A125, &k5),
                    (A126, &k6),
                    (A127, &k7),
                    (A128, &k8),
                    (A129, &k9),
                    (A1210, &k10),
                    (A1211, &k11),
                ],
            ),
        );

        let mut y_new = [0.0; N];
        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..N {
            let slope = B1 * k1[i]
                + B6 * k6[i]
                + B7 * k7[i]
                + B8 * k8[i]
                + B9 * k9[i]
                + B10 * k10[i]
                + B11 * k11[i]
                + B12 * k12[i];
            y_new[i] = y[i] + h * slope;
            let e3 = slope - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i];
            let e5 = ER1 * k1[i]
                + ER6 * k6[i]
                + ER7 * k7[i]
                + ER8 * k8[i]
                + ER9 * k9[i]
                + ER10 * k10[i]
                + ER11 * k11[i]
                + ER12 * k12[i];
            let sk = self.tol.abs_tol + self.tol.rel_tol * y[i].abs().max(y_new[i].abs());
            err5 += (e5 / sk).powi(2);
            err3 += (e3 / sk).powi(2);
        }
        let mut deno = err5 + 0.01 * err3;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h.abs() * err5 * (1.0 / (N as f64 * deno)).sqrt();
        Stages { k6, k7, k8, k9, k10, k11, k12, y_new, err }
    }

    fn dense(&self, h: f64, s: &Stages<N>, dydx_new: &[f64; N]) -> DenseStep<N> {
        let t = self.t;
        let y = &self.y;
        let k1 = &self.dydx;
        let f = |c: f64, yt: &[f64; N]| self.sys.rhs(t + c * h, yt);

        let k14 = f(
            C14,
            &combo(
                y,
                h,
                &[
                    (A141, k1),
                    (A147, &s.k7),
                    (A148, &s.k8),
                    (A149, &s.k9),
                    (A1410, &s.k10),
                    (A1411, &s.k11),
                    (A1412, &s.k12),
                    (A1413, dydx_new),
                ],
            ),
        );
        let k15 = f(
            C15,
            &combo(
                y,
                h,
                &[
                    (A151, k1),
                    (A156, &s.k6),
                    (A157, &s.k7),
                    (A158, &s.k8),
                    (A1511, &s.k11),
                    (A1512, &s.k12),
                    (A1513, dydx_new),
                    (A1514, &k14),
                ],
            ),
        );
        let k16 = f(
            C16,
            &combo(
                y,
                h,
                &[
                    (A161, k1),
                    (A166, &s.k6),
                    (A167, &s.k7),
                    (A168, &s.k8),
                    (A169, &s.k9),
                    (A1613, dydx_new),
                    (A1614, &k14),
                    (A1615, &k15),
                ],
            ),
        );

        let mut coeffs = [[0.0; N]; 8];
        for i in 0..N {
            let ydiff = s.y_new[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            coeffs[0][i] = y[i];
            coeffs[1][i] = ydiff;
            coeffs[2][i] = bspl;
            coeffs[3][i] = ydiff - h * dydx_new[i] - bspl;
            let stage = [
                k1[i],
                s.k6[i],
                s.k7[i],
                s.k8[i],
                s.k9[i],
                s.k10[i],
                s.k11[i],
                s.k12[i],
                dydx_new[i],
                k14[i],
                k15[i],
                k16[i],
            ];
            for (row, d) in [&D4, &D5, &D6, &D7].iter().enumerate() {
                let acc: f64 = d.iter().zip(stage.iter()).map(|(a, b)| a * b).sum();
                coeffs[4 + row][i] = h * acc;
            }
        }
        DenseStep { t0: t, h, coeffs }
    }
}

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (a, k) in terms {
            acc += a * k[i];
        }
        *o += h * acc;
    }
    out
}

const C2: f64 = 0.526001519587677318785587544488e-01;
const C3: f64 = 0.789002279381515978178381316732e-01;
const C4: f64 = 0.118350341907227396726757197510e+00;
const C5: f64 = 0.281649658092772603273242802490e+00;
const C6: f64 = 0.333333333333333333333333333333e+00;
const C7: f64 = 0.25e+00;
const C8: f64 = 0.307692307692307692307692307692e+00;
const C9: f64 = 0.651282051282051282051282051282e+00;
const C10: f64 = 0.6e+00;
const C11: f64 = 0.857142857142857142857142857142e+00;
const C14: f64 = 0.1e+00;
const C15: f64 = 0.2e+00;
const C16: f64 = 0.777777777777777777777777777778e+00;

const B1: f64 = 5.42937341165687622380535766363e-2;
const B6: f64 = 4.45031289275240888144113950566e0;
const B7: f64 = 1.89151789931450038304281599044e0;
const B8: f64 = -5.8012039600105847814672114227e0;
const B9: f64 = 3.1116436695781989440891606237e-1;
const B10: f64 = -1.52160949662516078556178806805e-1;
const B11: f64 = 2.01365400804030348374776537501e-1;
const B12: f64 = 4.47106157277725905176885569043e-2;

const BHH1: f64 = 0.244094488188976377952755905512e+00;
const BHH2: f64 = 0.733846688281611857341361741547e+00;
const BHH3: f64 = 0.220588235294117647058823529412e-01;

const ER1: f64 = 0.1312004499419488073250102996e-01;
const ER6: f64 = -0.1225156446376204440720569753e+01;
const ER7: f64 = -0.4957589496572501915214079952e+00;
const ER8: f64 = 0.1664377182454986536961530415e+01;
const ER9: f64 = -0.3503288487499736816886487290e+00;
const ER10: f64 = 0.3341791187130174790297318841e+00;
const ER11: f64 = 0.8192320648511571246570742613e-01;
const ER12: f64 = -0.2235530786388629525884427845e-01;

const A21: f64 = 5.26001519587677318785587544488e-2;
const A31: f64 = 1.97250569845378994544595329183e-2;
const A32: f64 = 5.91751709536136983633785987549e-2;
const A41: f64 = 2.95875854768068491816892993775e-2;
const A43: f64 = 8.87627564304205475450678981324e-2;
const A51: f64 = 2.41365134159266685502369798665e-1;
const A53: f64 = -8.84549479328286085344864962717e-1;
const A54: f64 = 9.24834003261792003115737966543e-1;
const A61: f64 = 3.7037037037037037037037037037e-2;
const A64: f64 = 1.70828608729473871279604482173e-1;
const A65: f64 = 1.25467687566822425016691814123e-1;
const A71: f64 = 3.7109375e-2;
const A74: f64 = 1.70252211019544039314978060272e-1;
const A75: f64 = 6.02165389804559606850219397283e-2;
const A76: f64 = -1.7578125e-2;
const A81: f64 = 3.70920001185047927108779319836e-2;
const A84: f64 = 1.70383925712239993810214054705e-1;
const A85: f64 = 1.07262030446373284651809199168e-1;
const A86: f64 = -1.53194377486244017527936158236e-2;
const A87: f64 = 8.27378916381402288758473766002e-3;
const A91: f64 = 6.24110958716075717114429577812e-1;
const A94: f64 = -3.36089262944694129406857109825e0;
const A95: f64 = -8.68219346841726006818189891453e-1;
const A96: f64 = 2.75920996994467083049415600797e1;
const A97: f64 = 2.01540675504778934086186788979e1;
const A98: f64 = -4.34898841810699588477366255144e1;
const A101: f64 = 4.77662536438264365890433908527e-1;
const A104: f64 = -2.48811461997166764192642586468e0;
const A105: f64 = -5.90290826836842996371446475743e-1;
const A106: f64 = 2.12300514481811942347288949897e1;
const A107: f64 = 1.52792336328824235832596922938e1;
const A108: f64 = -3.32882109689848629194453265587e1;
const A109: f64 = -2.03312017085086261358222928593e-2;
const A111: f64 = -9.3714243008598732571704021658e-1;
const A114: f64 = 5.18637242884406370830023853209e0;
const A115: f64 = 1.09143734899672957818500254654e0;
const A116: f64 = -8.14978701074692612513997267357e0;
const A117: f64 = -1.85200656599969598641566180701e1;
const A118: f64 = 2.27394870993505042818970056734e1;
const A119: f64 = 2.49360555267965238987089396762e0;
const A1110: f64 = -3.0467644718982195003823669022e0;
const A121: f64 = 2.27331014751653820792359768449e0;
const A124: f64 = -1.05344954667372501984066689879e1;
const A125: f64 = -2.00087205822486249909675718444e0;
const A126: f64 = -1.79589318631187989172765950534e1;
const A127: f64 = 2.79488845294199600508499808837e1;
const A128: f64 = -2.85899827713502369474065508674e0;
const A129: f64 = -8.87285693353062954433549289258e0;
const A1210: f64 = 1.23605671757943030647266201528e1;
const A1211: f64 = 6.43392746015763530355970484046e-1;

const A141: f64 = 5.61675022830479523392909219681e-2;
const A147: f64 = 2.53500210216624811088794765333e-1;
const A148: f64 = -2.46239037470802489917441475441e-1;
const A149: f64 = -1.24191423263816360469010140626e-1;
const A1410: f64 = 1.5329179827876569731206322685e-1;
const A1411: f64 = 8.20105229563468988491666602057e-3;
const A1412: f64 = 7.56789766054569976138603589584e-3;
const A1413: f64 = -8.298e-3;
const A151: f64 = 3.18346481635021405060768473261e-2;
const A156: f64 = 2.83009096723667755288322961402e-2;
const A157: f64 = 5.35419883074385676223797384372e-2;
const A158: f64 = -5.49237485713909884646569340306e-2;
const A1511: f64 = -1.08347328697249322858509316994e-4;
const A1512: f64 = 3.82571090835658412954920192323e-4;
const A1513: f64 = -3.40465008687404560802977114492e-4;
const A1514: f64 = 1.41312443674632500278074618366e-1;
const A161: f64 = -4.28896301583791923408573538692e-1;
const A166: f64 = -4.69762141536116384314449447206e0;
const A167: f64 = 7.68342119606259904184240953878e0;
const A168: f64 = 4.06898981839711007970213554331e0;
const A169: f64 = 3.56727187455281109270669543021e-1;
const A1613: f64 = -1.39902416515901462129418009734e-3;
const A1614: f64 = 2.9475147891527723389556272149e0;
const A1615: f64 = -9.15095847217987001081870187138e0;

// Dense-output weights, in stage order
// [k1, k6, k7, k8, k9, k10, k11, k12, f(t+h), k14, k15, k16].
const D4: [f64; 12] = [
    -0.84289382761090128651353491142e+01,
    0.56671495351937776962531783590e+00,
    -0.30689499459498916912797304727e+01,
    0.23846676565120698287728149680e+01,
    0.21170345824450282767155149946e+01,
    -0.87139158377797299206789907490e+00,
    0.22404374302607882758541771650e+01,
    0.63157877876946881815570249290e+00,
    -0.88990336451333310820698117400e-01,
    0.18148505520854727256656404962e+02,
    -0.91946323924783554000451984436e+01,
    -0.44360363875948939664310572000e+01,
];
const D5: [f64; 12] = [
    0.10427508642579134603413151009e+02,
    0.24228349177525818288430175319e+03,
    0.16520045171727028198505394887e+03,
    -0.37454675472269020279518312152e+03,
    -0.22113666853125306036270938578e+02,
    0.77334326684722638389603898808e+01,
    -0.30674084731089398182061213626e+02,
    -0.93321305264302278729567221706e+01,
    0.15697238121770843886131091075e+02,
    -0.31139403219565177677282850411e+02,
    -0.93529243588444783865713862664e+01,
    0.35816841486394083752465898540e+02,
];
const D6: [f64; 12] = [
    0.19985053242002433820987653617e+02,
    -0.38703730874935176555105901742e+03,
    -0.18917813819516756882830838328e+03,
    0.52780815920542364900561016686e+03,
    -0.11573902539959630126141871134e+02,
    0.68812326946963000169666922661e+01,
    -0.10006050966910838403183860980e+01,
    0.77771377980534432092869265740e+00,
    -0.27782057523535084065932004339e+01,
    -0.60196695231264120758267380846e+02,
    0.84320405506677161018159903784e+02,
    0.11992291136182789328035130030e+02,
];
const D7: [f64; 12] = [
    -0.25693933462703749003312586129e+02,
    -0.15418974869023643374053993627e+03,
    -0.23152937917604549567536039109e+03,
    0.35763911791061412378285349910e+03,
    0.93405324183624310003907691704e+02,
    -0.37458323136451633156875139351e+02,
    0.10409964950896230045147246184e+03,
    0.29840293426660503123344363579e+02,
    -0.43533456590011143754432175058e+02,
    0.96324553959188282948394950600e+02,
    -0.39177261675615439165231486172e+02,
    -0.14972683625798562581422125276e+03,
];
