use ofl_thfhe::ring::Poly;
use ofl_thfhe::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn backend(params: ThFheParams, parties: usize, seed: u64) -> ThFhe {
    ThFhe::new(params, parties, &power_of_two_rotations(64), &mut rng(seed)).unwrap()
}

fn random_vec(len: usize, r: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| r.random_range(-1.0..1.0)).collect()
}

fn max_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Decryption with the dealer's secret, bypassing ServerDec.
fn direct_decrypt(he: &ThFhe, ct: &Ciphertext) -> Vec<f64> {
    let bits = he.params().modulus_bits(ct.level);
    let mut pt = ct.c1.mul_small(he.keys().secret());
    pt.add_assign(&ct.c2);
    pt.mask(bits);
    he.encoder().decode(&pt.centered(bits), 2f64.powi(ct.scale_bits as i32), ct.period)
}

#[test]
fn end_to_end_on_a_hundred_vectors() {
    let he = backend(ThFheParams::desk(), 4, 1);
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = random_vec(64, &mut r);
        let ct = he.encrypt(&m, &mut r).unwrap();
        worst = worst.max(max_err(&m, &he.decrypt_jointly(&ct, &mut r).unwrap()));
    }
    eprintln!("worst end-to-end error {worst:e}");
    assert!(worst <= DELTA_DEC);
}

#[test]
fn literal_message_round_trip() {
    let he = backend(ThFheParams::desk(), 3, 3);
    let mut r = rng(3);
    let mut m = vec![3.25, -1.5, 0.0, 0.0625];
    m.extend((4..64).map(|i| (i as f64).cos()));
    let ct = he.encrypt(&m, &mut r).unwrap();
    assert!(max_err(&m, &he.decrypt_jointly(&ct, &mut r).unwrap()) <= DELTA_DEC);
    let zero = he.encrypt(&[0.0; 64], &mut r).unwrap();
    assert!(he.decrypt_jointly(&zero, &mut r).unwrap().iter().all(|v| v.abs() <= DELTA_DEC));
}

#[test]
fn encoding_round_trip_at_default_scale() {
    let p = ThFheParams::desk();
    let enc = ofl_thfhe::encoding::Encoder::new(p.ring_degree);
    let mut r = rng(4);
    let m = random_vec(p.slots(), &mut r);
    let c = enc.encode(&m, p.slots(), p.scale(), 250).unwrap();
    let back = enc.decode(&c.iter().map(|&x| x as f64).collect::<Vec<_>>(), p.scale(), p.slots());
    assert!(max_err(&m, &back) <= DELTA_ENC);
}

#[test]
fn public_key_error_is_small() {
    let p = ThFheParams::desk();
    let he = backend(p.clone(), 2, 5);
    let pk = &he.keys().public_key;
    let bits = p.modulus_bits(p.levels);
    let mut e = pk.a.mul_small(he.keys().secret());
    e.add_assign(&pk.b);
    e.mask(bits);
    assert!(e.centered(bits).iter().all(|c| c.abs() <= 6.0 * p.sigma));
}

#[test]
fn shares_sum_to_secret_over_many_keygens() {
    let p = ThFheParams { ring_degree: 256, ..ThFheParams::desk() };
    let bits = p.dec_bits();
    let mut r = rng(6);
    for i in 0..100 {
        let km = keygen(&p, 2 + i % 5, &[], &mut r).unwrap();
        let mut sum = Poly::zero(256);
        for s in &km.shares {
            sum.add_assign(&s.poly);
        }
        sum.mask(bits);
        let mut s = km.secret().to_poly();
        s.mask(bits);
        assert_eq!(sum, s);
    }
}

#[test]
fn encryption_is_randomized() {
    let he = backend(ThFheParams::desk(), 2, 7);
    let mut r = rng(7);
    let m = random_vec(64, &mut r);
    assert_ne!(he.encrypt(&m, &mut r).unwrap(), he.encrypt(&m, &mut r).unwrap());
}

#[test]
fn homomorphic_add_cmult_rotate() {
    let he = backend(ThFheParams::desk(), 3, 8);
    let mut r = rng(8);
    let x = random_vec(64, &mut r);
    let y = random_vec(64, &mut r);
    let cx = he.encrypt(&x, &mut r).unwrap();
    let cy = he.encrypt(&y, &mut r).unwrap();

    let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
    let got = he.decrypt_jointly(&he.add(&cx, &cy).unwrap(), &mut r).unwrap();
    assert!(max_err(&sum, &got) <= 2.0 * DELTA_DEC);

    let ones = he.cmult(&cx, &[1.0; 64]).unwrap();
    assert_eq!(ones.level, cx.level - 1);
    assert!(max_err(&x, &he.decrypt_jointly(&ones, &mut r).unwrap()) <= DELTA_DEC);

    let back = he.rotate(&he.rotate(&cx, Rotation::Left(8)).unwrap(), Rotation::Right(8)).unwrap();
    assert!(max_err(&x, &he.decrypt_jointly(&back, &mut r).unwrap()) <= DELTA_DEC);

    let left = he.decrypt_jointly(&he.rotate(&cx, Rotation::Left(16)).unwrap(), &mut r).unwrap();
    let shifted: Vec<f64> = (0..64).map(|i| x[(i + 16) % 64]).collect();
    assert!(max_err(&shifted, &left) <= DELTA_DEC);
    assert_eq!(he.rotate(&cx, Rotation::Left(5)).unwrap_err(), Error::MissingRotationKey(5));
}

#[test]
fn homomorphism_holds_across_trials() {
    let he = backend(ThFheParams::desk(), 2, 9);
    let mut r = rng(9);
    for _ in 0..100 {
        let x = random_vec(8, &mut r);
        let y = random_vec(8, &mut r);
        let c: Vec<f64> = random_vec(8, &mut r);
        let cx = he.encrypt(&x, &mut r).unwrap();
        let cy = he.encrypt(&y, &mut r).unwrap();
        let ct = he.add(&he.cmult(&cx, &c).unwrap(), &he.cmult(&cy, &[0.5]).unwrap()).unwrap();
        let want: Vec<f64> = (0..8).map(|i| x[i] * c[i] + 0.5 * y[i]).collect();
        assert!(max_err(&want, &direct_decrypt(&he, &ct)) <= DELTA_DEC);
    }
}

#[test]
fn homomorphic_mean_matches_plaintext() {
    let he = backend(ThFheParams::desk(), 4, 10);
    let mut r = rng(10);
    let vs: Vec<Vec<f64>> = (0..4).map(|_| random_vec(64, &mut r)).collect();
    let mut acc = he.cmult(&he.encrypt(&vs[0], &mut r).unwrap(), &[0.25]).unwrap();
    for v in &vs[1..] {
        let c = he.cmult(&he.encrypt(v, &mut r).unwrap(), &[0.25]).unwrap();
        acc = he.add(&acc, &c).unwrap();
    }
    let mean: Vec<f64> = (0..64).map(|j| vs.iter().map(|v| v[j]).sum::<f64>() / 4.0).collect();
    assert!(max_err(&mean, &he.decrypt_jointly(&acc, &mut r).unwrap()) <= 4.0 * DELTA_DEC);
}

#[test]
fn depth_budget_is_enforced() {
    let he = backend(ThFheParams::desk(), 2, 11);
    let mut r = rng(11);
    let mut ct = he.encrypt(&[1.0; 4], &mut r).unwrap();
    for expected in (1..he.max_level()).rev() {
        ct = he.cmult(&ct, &[1.0]).unwrap();
        assert_eq!(ct.level, expected);
    }
    let err = he.cmult(&ct, &[1.0]).unwrap_err();
    assert!(err.to_string().contains("depth budget exceeded"));
}

#[test]
fn flooding_off_matches_direct_decryption() {
    let he = backend(ThFheParams::test_mode(), 3, 12);
    let mut r = rng(12);
    let m = random_vec(64, &mut r);
    let ct = he.encrypt(&m, &mut r).unwrap();
    let dec = he.server_dec(&ct, &mut r).unwrap();
    let baseline = direct_decrypt(&he, &dec);
    let pds: Vec<_> = (0..3).map(|i| he.part_dec(i, &dec, &mut r).unwrap()).collect();
    let piped = he.fin_dec(&dec, &pds).unwrap();
    assert!(max_err(&baseline, &piped) <= 1e-12);
    assert!(max_err(&m, &piped) <= DELTA_DEC);
}

#[test]
fn flooded_server_dec_is_randomized_but_correct() {
    let he = backend(ThFheParams::desk(), 2, 13);
    let mut r = rng(13);
    let m = random_vec(64, &mut r);
    let ct = he.encrypt(&m, &mut r).unwrap();
    let d1 = he.server_dec(&ct, &mut r).unwrap();
    let d2 = he.server_dec(&ct, &mut r).unwrap();
    assert_ne!(d1.c1, d2.c1);
    assert_eq!(d1.space, Space::Dec);
    assert!(he.add(&d1, &d2).is_err());
    assert!(he.server_dec(&d1, &mut r).is_err());
}

#[test]
fn partial_decryption_without_noise_is_exact_product() {
    let he = backend(ThFheParams::test_mode(), 2, 14);
    let mut r = rng(14);
    let ct = he.encrypt(&[1.0, 2.0], &mut r).unwrap();
    let dec = he.server_dec(&ct, &mut r).unwrap();
    let pd = he.part_dec(1, &dec, &mut r).unwrap();
    let bits = he.params().modulus_bits(dec.level);
    let mut expected = dec.c1.mul(&he.keys().shares[1].poly);
    expected.mask(bits);
    assert_eq!(pd.share, expected);
}

#[test]
fn fin_dec_needs_every_distinct_share() {
    let he = backend(ThFheParams::desk(), 3, 15);
    let mut r = rng(15);
    let ct = he.encrypt(&[1.0], &mut r).unwrap();
    let dec = he.server_dec(&ct, &mut r).unwrap();
    let pds: Vec<_> = (0..3).map(|i| he.part_dec(i, &dec, &mut r).unwrap()).collect();
    assert_eq!(he.fin_dec(&dec, &pds[..2]).unwrap_err(), Error::MissingShare { expected: 3, actual: 2 });
    let dup = vec![pds[0].clone(), pds[1].clone(), pds[1].clone()];
    assert_eq!(he.fin_dec(&dec, &dup).unwrap_err(), Error::DuplicateParty(1));
    let other = he.server_dec(&ct, &mut r).unwrap();
    assert_eq!(he.fin_dec(&other, &pds).unwrap_err(), Error::SessionMismatch);
    assert!((he.fin_dec(&dec, &pds).unwrap()[0] - 1.0).abs() <= DELTA_DEC);
}

#[test]
fn missing_share_leaves_output_uncorrelated() {
    let he = backend(ThFheParams::desk(), 3, 16);
    let mut r = rng(16);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for _ in 0..200 {
        let m = random_vec(64, &mut r);
        let ct = he.encrypt(&m, &mut r).unwrap();
        let dec = he.server_dec(&ct, &mut r).unwrap();
        let bits = he.params().modulus_bits(dec.level);
        let mut pt = dec.c2.clone();
        for i in 0..2 {
            pt.add_assign(&he.part_dec(i, &dec, &mut r).unwrap().share);
        }
        pt.mask(bits);
        let out = he.encoder().decode(&pt.centered(bits), 2f64.powi(dec.scale_bits as i32), 64);
        xs.extend_from_slice(&m);
        ys.extend(out);
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let rho = cov / (vx * vy).sqrt();
    eprintln!("correlation with n−1 shares: {rho:.4}");
    assert!(rho.abs() < 0.05);
}

#[test]
fn reshare_keeps_decryption_working() {
    let mut he = backend(ThFheParams::desk(), 2, 17);
    let mut r = rng(17);
    let ct = he.encrypt(&[0.5, -0.25], &mut r).unwrap();
    he.reshare(5, &mut r).unwrap();
    assert_eq!(he.party_count(), 5);
    let out = he.decrypt_jointly(&ct, &mut r).unwrap();
    assert!(max_err(&[0.5, -0.25], &out) <= DELTA_DEC);
}

#[test]
fn ciphertext_bytes_round_trip() {
    let he = backend(ThFheParams::desk(), 2, 18);
    let mut r = rng(18);
    let ct = he.cmult(&he.encrypt(&[1.0, 2.0, 3.0], &mut r).unwrap(), &[2.0]).unwrap();
    let bytes = he.ct_to_bytes(&ct);
    assert_eq!(&bytes[..4], b"OFLC");
    assert_eq!(he.ct_from_bytes(&bytes).unwrap(), ct);
    let err = he.ct_from_bytes(&bytes[..bytes.len() - 1]).unwrap_err();
    assert!(matches!(err, Error::Decode { .. }));
    let dec = he.server_dec(&ct, &mut r).unwrap();
    assert_eq!(he.ct_from_bytes(&he.ct_to_bytes(&dec)).unwrap(), dec);
}

#[test]
fn invalid_params_are_rejected() {
    let bad = ThFheParams { ring_degree: 100, ..ThFheParams::desk() };
    assert!(matches!(ThFhe::new(bad, 2, &[], &mut rng(0)), Err(Error::InvalidParams(_))));
    assert!(ThFhe::new(ThFheParams::desk(), 0, &[], &mut rng(0)).is_err());
}

#[test]
#[ignore = "ring degree 2^14 takes minutes with schoolbook products"]
fn full_scale_round_trip() {
    let he = ThFhe::new(ThFheParams::full_scale(), 2, &[], &mut rng(19)).unwrap();
    let mut r = rng(19);
    let m = random_vec(1024, &mut r);
    let ct = he.encrypt(&m, &mut r).unwrap();
    assert!(max_err(&m, &he.decrypt_jointly(&ct, &mut r).unwrap()) <= DELTA_DEC);
}
