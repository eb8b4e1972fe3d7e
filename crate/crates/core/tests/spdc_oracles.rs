use layered_spdc::materials::Material;
use layered_spdc::spdc::*;
use layered_spdc::structure::LayeredStructure;
use layered_spdc::tmm::{scattering_solution, IncidenceGeometry, LayerField, Side};
use layered_spdc::units::omega_from_wavelength_nm;
use layered_spdc::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GL_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss–Legendre quadrature.
fn quad(f: impl Fn(f64) -> Complex64, lo: f64, hi: f64, panels: usize) -> Complex64 {
    let h = (hi - lo) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = lo + h * (p as f64 + 0.5);
        for (x, w) in GL_X.iter().zip(GL_W) {
            acc += f(mid + 0.5 * h * x) * (0.5 * h * w);
        }
    }
    acc
}

fn random_field(rng: &mut ChaCha8Rng) -> LayerField {
    let mut c = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    LayerField {
        forward: c(),
        backward: c(),
        kz: Complex64::new(rng.gen_range(0.005..0.03), rng.gen_range(0.0..1e-4)),
    }
}

#[test]
fn overlap_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (p, s, i) = (random_field(&mut rng), random_field(&mut rng), random_field(&mut rng));
        let lo = rng.gen_range(0.0..50.0);
        let hi = lo + rng.gen_range(50.0..400.0);
        let exact = layer_overlap(&p, &s, &i, lo, hi);
        let numeric = quad(
            |z| p.field_at(z) * s.field_at(z).conj() * i.field_at(z).conj(),
            lo,
            hi,
            400,
        );
        assert!((exact - numeric).norm() <= 1e-10 * numeric.norm().max(1.0), "{exact} {numeric}");
    }
}

#[test]
fn overlap_full_oscillation_cancels() {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let w = 300.0;
    let k = 2.0 * std::f64::consts::PI / w;
    let p = LayerField { forward: one, backward: zero, kz: Complex64::new(k, 0.0) };
    let flat = LayerField { forward: one, backward: zero, kz: zero };
    assert!(layer_overlap(&p, &flat, &flat, 0.0, w).norm() < 1e-12);
}

fn small_structure() -> LayeredStructure {
    let ln = Material::lithium_niobate();
    let si = Material::silica();
    LayeredStructure::from_pairs(&[
        (&ln, 181.0),
        (&si, 268.0),
        (&ln, 170.5),
        (&ln, 199.0),
        (&si, 301.0),
        (&ln, 176.0),
    ])
    .unwrap()
}

#[test]
fn amplitude_matches_field_quadrature() {
    // Independent route: integrate the product of the three incoming
    // scattering states (pump from the front, signal and idler from the
    // detection side) layer by layer.
    let s = small_structure();
    let pump = PumpPulse::standard();
    let geometry = EmissionGeometry::degenerate(10.0);
    let ws = [omega_from_wavelength_nm(1551.0), omega_from_wavelength_nm(1548.0)];
    let wi = [
        omega_from_wavelength_nm(1556.0),
        omega_from_wavelength_nm(1553.0),
        omega_from_wavelength_nm(1549.0),
    ];
    let a = two_photon_amplitude(&s, &pump, &geometry, &ws, &wi).unwrap();
    for (i, &w_s) in ws.iter().enumerate() {
        for (j, &w_i) in wi.iter().enumerate() {
            let p = scattering_solution(&s, &IncidenceGeometry::front(w_s + w_i, 0.0).unwrap()).unwrap();
            let sg = scattering_solution(&s, &IncidenceGeometry::new(w_s, 10.0, Side::Rear).unwrap()).unwrap();
            let id = scattering_solution(&s, &IncidenceGeometry::new(w_i, 10.0, Side::Rear).unwrap()).unwrap();
            let mut sum = Complex64::new(0.0, 0.0);
            for (k, layer) in s.layers().iter().enumerate() {
                let chi = s.material_of(layer).chi2;
                if chi == 0.0 {
                    continue;
                }
                let (fp, fs, fi) = (p.per_layer[k], sg.per_layer[k], id.per_layer[k]);
                sum += chi
                    * quad(
                        |z| fp.field_at(z) * fs.field_at(z) * fi.field_at(z),
                        0.0,
                        layer.thickness_nm,
                        200,
                    );
            }
            let expected = pump_spectrum(&pump, w_s + w_i) * sum;
            let got = a.at(i, j);
            assert!((got - expected).norm() < 1e-9 * expected.norm(), "{got} vs {expected}");
        }
    }
}

#[test]
fn signal_mode_is_conjugated_rear_solution() {
    let s = small_structure();
    let w = omega_from_wavelength_nm(1560.0);
    let m = mode_function(&s, w, 12.0, Role::Signal, Side::Rear).unwrap();
    let sol = scattering_solution(&s, &IncidenceGeometry::rear(w, 12.0).unwrap()).unwrap();
    for (k, (mf, sf)) in m.layers.iter().zip(&sol.per_layer).enumerate() {
        let d = s.layers()[k].thickness_nm;
        for u in [0.0, 0.3 * d, d] {
            assert!((mf.field_at(u) - sf.field_at(u).conj()).norm() < 1e-12);
        }
    }
}

fn grid_near(nm: f64, half_nm: f64, n: usize) -> Vec<f64> {
    let c = omega_from_wavelength_nm(nm);
    let h = c - omega_from_wavelength_nm(nm + half_nm);
    centred_grid(c, h, n)
}

#[test]
fn degenerate_amplitude_is_swap_symmetric_and_normalizes() {
    let s = small_structure();
    let g = grid_near(1550.0, 8.0, 21);
    let a = two_photon_amplitude(&s, &PumpPulse::standard(), &EmissionGeometry::degenerate(10.0), &g, &g).unwrap();
    let peak = a.phi.iter().map(|p| p.norm()).fold(0.0, f64::max);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            assert!((a.at(i, j) - a.at(j, i)).norm() <= 1e-9 * peak);
        }
    }
    let n = normalize_amplitude(&a).unwrap();
    assert!((n.normalization_integral() - 1.0).abs() < 1e-9);
    assert!(n.normalized);

    // Idempotent and scale invariant.
    let again = normalize_amplitude(&n).unwrap();
    let seven = normalize_amplitude(&scaled(&a, 7.0)).unwrap();
    let npeak = n.phi.iter().map(|p| p.norm()).fold(0.0, f64::max);
    for k in 0..n.phi.len() {
        assert!((again.phi[k] - n.phi[k]).norm() <= 1e-12 * npeak);
        assert!((seven.phi[k] - n.phi[k]).norm() <= 1e-12 * npeak);
    }
}

fn scaled(a: &TwoPhotonAmplitude, f: f64) -> TwoPhotonAmplitude {
    let mut out = a.clone();
    for p in &mut out.phi {
        *p *= f;
    }
    out
}

#[test]
fn strict_and_fixed_idler_agree_on_diagonal() {
    let s = small_structure();
    let g = grid_near(1550.0, 2.0, 5);
    let fixed = EmissionGeometry::degenerate(10.0);
    let mut strict = fixed;
    strict.idler_rule = IdlerAngleRule::Strict;
    let pump = PumpPulse::standard();
    let a = two_photon_amplitude(&s, &pump, &fixed, &g, &g).unwrap();
    let b = two_photon_amplitude(&s, &pump, &strict, &g, &g).unwrap();
    for k in 0..g.len() {
        assert!((a.at(k, k) - b.at(k, k)).norm() <= 1e-12 * a.at(k, k).norm());
    }
}

#[test]
fn long_pump_confines_amplitude_to_energy_line() {
    let s = small_structure();
    let pump = PumpPulse {
        central_wavelength_nm: 775.0,
        duration_fwhm_fs: 2.0e6,
    };
    let g = grid_near(1550.0, 1.0, 41);
    let a = two_photon_amplitude(&s, &pump, &EmissionGeometry::degenerate(10.0), &g, &g).unwrap();
    // Cells with i + j within 3 of the index of ω_s + ω_i = ω_p⁰.
    let h = g[1] - g[0];
    let k0 = ((pump.omega0() - 2.0 * g[0]) / h).round() as i64;
    let (mut off, mut total) = (0.0, 0.0);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let m = a.at(i, j).norm_sqr();
            total += m;
            if (i as i64 + j as i64 - k0).abs() > 3 {
                off += m;
            }
        }
    }
    assert!(off < 0.01 * total, "{}", off / total);
}

#[test]
fn pump_pulse_duration_from_inverse_transform() {
    let p = PumpPulse::standard();
    let w0 = p.omega0();
    let span = 6.0 * p.spectral_intensity_fwhm();
    let n = 4001;
    let grid = centred_grid(w0, span, n);
    let h = grid[1] - grid[0];
    let field = |t: f64| -> f64 {
        grid.iter()
            .map(|w| pump_spectrum(&p, *w) * Complex64::from_polar(h, -(w - w0) * t))
            .sum::<Complex64>()
            .norm_sqr()
    };
    let peak = field(0.0);
    let (mut lo, mut hi) = (0.0, 1e-12);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if field(mid) > 0.5 * peak {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let fwhm_fs = 2.0 * lo * 1e15;
    assert!((fwhm_fs - 250.0).abs() < 2.5, "{fwhm_fs}");
}

#[test]
fn reference_is_its_own_reference() {
    let s = small_structure();
    let reference = layered_spdc::structure::reference_structure(&s).unwrap();
    assert!((reference.nonlinear_length_nm - (181.0 + 170.5 + 199.0 + 176.0)).abs() < 1e-9);
    let g = grid_near(1550.0, 3.0, 9);
    let r = reference_amplitude(&reference, &PumpPulse::standard(), &EmissionGeometry::degenerate(10.0), &g, &g).unwrap();
    for v in relative_spectrum(&r, &reference).unwrap() {
        assert!((v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn relative_spectrum_ignores_normalization() {
    let s = small_structure();
    let reference = layered_spdc::structure::reference_structure(&s).unwrap();
    let g = grid_near(1550.0, 3.0, 9);
    let a = two_photon_amplitude(&s, &PumpPulse::standard(), &EmissionGeometry::degenerate(10.0), &g, &g).unwrap();
    let n = normalize_amplitude(&a).unwrap();
    let x = relative_spectrum(&a, &reference).unwrap();
    let y = relative_spectrum(&n, &reference).unwrap();
    for (a, b) in x.iter().zip(&y) {
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }
    assert!((relative_pair_rate(&a) - relative_pair_rate(&n)).abs() <= 1e-12 * relative_pair_rate(&a));
}

#[test]
fn pair_rate_scales_quadratically() {
    let g = vec![1.0, 2.0, 3.0];
    let phi: Vec<Complex64> = (0..9).map(|k| Complex64::new(k as f64, 1.0)).collect();
    let a = TwoPhotonAmplitude::from_matrix(g.clone(), g.clone(), phi, EmissionGeometry::degenerate(10.0), PumpPulse::standard()).unwrap();
    let b = scaled(&a, 2.0);
    assert!((relative_pair_rate(&b) - 4.0 * relative_pair_rate(&a)).abs() < 1e-12);
    let z = TwoPhotonAmplitude::from_matrix(g.clone(), g, vec![Complex64::new(0.0, 0.0); 9], EmissionGeometry::degenerate(10.0), PumpPulse::standard()).unwrap();
    assert_eq!(relative_pair_rate(&z), 0.0);
}

#[test]
fn container_round_trip_is_bit_exact() {
    let s = small_structure();
    let g = grid_near(1550.0, 3.0, 7);
    let a = normalize_amplitude(
        &two_photon_amplitude(&s, &PumpPulse::standard(), &EmissionGeometry::degenerate(10.0), &g, &g).unwrap(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.bin");
    a.save(&path).unwrap();
    assert!(sidecar_path(&path).exists());
    let b = TwoPhotonAmplitude::load(&path).unwrap();
    assert_eq!(a, b);

    std::fs::write(&path, [0u8; 5]).unwrap();
    assert!(TwoPhotonAmplitude::load(&path).is_err());
}
