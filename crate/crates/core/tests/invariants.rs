use jacring::certify::generate_certified;
use jacring::duality::{duality_check, duality_grid};
use jacring::koszul::{koszul_complex, koszul_grid, Subspace};
use jacring::io::instance_to_json;
use jacring::{instance_digest, load_instance, BiDegree, FieldSpec, Instance, JacobianRing, PrimeField};
use proptest::prelude::*;

const SHAPES: &[(usize, &[u32], &[u32])] = &[
    (2, &[3], &[1]),
    (2, &[3], &[1, 1]),
    (2, &[4], &[]),
    (3, &[2, 2], &[]),
    (3, &[3], &[1]),
];

fn certified(shape: usize, seed: u64) -> Instance {
    let (n, d, e) = SHAPES[shape % SHAPES.len()];
    generate_certified(n, d, e, FieldSpec::Rationals, seed, 20, 1 << 26).unwrap().instance
}

fn piece_dims(inst: &Instance, p: u64) -> Vec<usize> {
    let ring = JacobianRing::new(inst, PrimeField::new(p).unwrap()).unwrap();
    let top = inst.top_bidegree();
    let mut out = Vec::new();
    for q in 0..=top.q + 1 {
        for l in -1..=top.l + 1 {
            out.push(ring.dim_b(BiDegree::new(q, l)).unwrap());
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn json_round_trip_preserves_instances(shape in 0usize..5, seed in any::<u64>(), prime in prop::bool::ANY) {
        let (n, d, e) = SHAPES[shape];
        let field = if prime { FieldSpec::PrimeField(10_007) } else { FieldSpec::Rationals };
        let inst = Instance::random(n, d, e, field, seed).unwrap();
        let text = instance_to_json(&inst);
        let back = load_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(instance_to_json(&back), text);
        prop_assert_eq!(instance_digest(&back), instance_digest(&inst));
    }

    #[test]
    fn dimensions_do_not_depend_on_the_large_prime(shape in 0usize..5, seed in 0u64..1000) {
        let inst = certified(shape, seed);
        prop_assert_eq!(piece_dims(&inst, 1_000_003), piece_dims(&inst, (1 << 61) - 1));
    }

    #[test]
    fn dimensions_are_invariant_under_relabelling_variables(shape in 0usize..5, seed in 0u64..1000, rot in 1usize..4) {
        let inst = certified(shape, seed);
        let k = inst.n() + 1;
        let perm: Vec<usize> = (0..k).map(|i| (i + rot) % k).collect();
        let moved = inst.permute_variables(&perm).unwrap();
        prop_assert_eq!(piece_dims(&inst, 1_000_003), piece_dims(&moved, 1_000_003));
    }

    #[test]
    fn top_piece_is_one_dimensional(shape in 0usize..5, seed in 0u64..1000) {
        let inst = certified(shape, seed);
        let ring = JacobianRing::new(&inst, PrimeField::new(1_000_003).unwrap()).unwrap();
        prop_assert_eq!(ring.dim_b(inst.top_bidegree()).unwrap(), 1);
        prop_assert!(ring.euler_identity_check().unwrap());
    }

    #[test]
    fn complementary_pieces_have_equal_dimension(shape in 0usize..5, seed in 0u64..1000) {
        let inst = certified(shape, seed);
        let ring = JacobianRing::new(&inst, PrimeField::new(1_000_003).unwrap()).unwrap();
        for (p, l) in duality_grid(&inst) {
            let report = duality_check(&ring, p, l).unwrap();
            if report.condition.is_iso() {
                prop_assert_eq!(report.left_dim, report.right_dim);
                prop_assert_eq!(report.rank, report.left_dim);
            }
        }
    }

    #[test]
    fn koszul_differentials_compose_to_zero(seed in 0u64..1000, codim in 0usize..3) {
        let inst = certified(0, seed);
        let ring = JacobianRing::new(&inst, PrimeField::new(1_000_003).unwrap()).unwrap();
        let amb = ring.dim_b(BiDegree::new(1, 0)).unwrap();
        let v = Subspace::random_codim(ring.field(), amb, codim.min(amb), seed).unwrap();
        for (p, q, l) in koszul_grid(&inst) {
            let cx = koszul_complex(&ring, &v, p, q, l).unwrap();
            let composite = cx.second.compose(&cx.first).unwrap();
            prop_assert!(composite.is_zero());
        }
    }
}
