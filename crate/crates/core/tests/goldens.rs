mod common;

use common::{nats, t};
use starpath::embedding::{compile_embedding_to_star, embeds, validate_witness};
use starpath::hydra::{
    bh_step, compile_sh_step_to_star, run_battle, sh_step, HerculesPolicy, HydraPolicy, HydraState,
    Limits, Outcome, ShChop, ShMove, Variant,
};
use starpath::star::{certificate_from_mpo, search_reduction, Budget};
use starpath::{tree_equal, validate_trace, Mode, Position, Precedence, Rule, Symbol};

#[test]
fn distributivity_certificate() {
    let prec = Precedence::chain(["1", "0"]);
    let cert = certificate_from_mpo(&t("1(0(?x))"), &t("0(0(1(?x)))"), &prec).unwrap();
    assert_eq!(
        cert.rules(),
        [Rule::Put, Rule::Copy, Rule::Copy, Rule::Down, Rule::Select]
    );
    validate_trace(&cert, &prec, Mode::Star).unwrap();
}

#[test]
fn kp_battle_is_slain_in_seven() {
    let log = run_battle(
        Variant::Kp,
        t("dagger(0(0,0))"),
        &HerculesPolicy::Leftmost,
        &HydraPolicy::fixed(2),
        Limits::default(),
    )
    .unwrap();
    assert_eq!(log.outcome, Outcome::Slain);
    let trees: Vec<_> = log
        .records
        .iter()
        .map(|r| t(r.tree.as_deref().unwrap()))
        .collect();
    let expected = [
        "dagger(0(0),0(0))",
        "dagger(0,0,0(0))",
        "dagger(0,0(0))",
        "dagger(0(0))",
        "dagger(0,0)",
        "dagger(0)",
        "dagger",
    ];
    assert_eq!(trees.len(), expected.len());
    for (got, want) in trees.iter().zip(expected) {
        assert!(tree_equal(got, &t(want)), "{got} vs {want}");
    }
}

#[test]
fn bh2_regrowth() {
    let s = HydraState::new(Variant::Bh, t("dagger(0(omega),0(2,7(5)))")).unwrap();
    let n = bh_step(&s, &Position(vec![2, 2, 1]), None).unwrap();
    assert!(tree_equal(
        &n.tree,
        &t("dagger(0(omega),0(2,7(4(2,7(0)))))")
    ));
}

#[test]
fn star_hydra_recorded_step() {
    let s = HydraState::new(Variant::Sh, t("4(2,3(6,5))")).unwrap();
    let n = |k| Symbol::natural(k);
    let chop = ShChop::at_leaf(&Position(vec![2, 2]), vec![n(4), n(4)]).unwrap();
    let moves = [
        ShMove::Lengthen {
            position: Position::root(),
            label: n(2),
        },
        ShMove::Lengthen {
            position: Position(vec![1, 2, 2]),
            label: n(3),
        },
        ShMove::Widen {
            position: Position(vec![1]),
            child: 2,
            count: 2,
        },
    ];
    let (post, log) = sh_step(&s, &chop, &moves).unwrap();
    assert!(tree_equal(
        &post.tree,
        &t("2(4(2,3(6,3(4),4),3(6,3(4),4)))")
    ));
    let cert = compile_sh_step_to_star(&s.tree, &log).unwrap();
    let prec = starpath::hydra::sh_precedence(&s.tree, &log);
    validate_trace(&cert, &prec, Mode::Star).unwrap();
    assert!(tree_equal(&cert.end, &post.tree));
}

#[test]
fn buchholz_witness() {
    let w = starpath::hydra::bh_non_simulability_witness();
    w.check().unwrap();
    assert!(tree_equal(&w.fragment.end, &w.bh_step.start));
    assert!(w.search_forbidden(Budget::default()).is_err());
}

#[test]
fn embedding_examples() {
    let order = Precedence::numeric(&nats(10));
    let small = t("2(9,7(0,4))");
    let big = t("1(3(8(8(5,1)),9,5(9)),2)");
    let w = embeds(&small, &big, &order).unwrap();
    validate_witness(&small, &big, &w, &order).unwrap();
    assert_eq!(w.mapping.len(), 5);
    let tr = compile_embedding_to_star(&small, &big, &w, &order).unwrap();
    assert!(tree_equal(&tr.end, &small));

    assert!(embeds(&t("1(0,0)"), &t("1(0(0,0))"), &order).is_none());
}

#[test]
fn search_finds_the_certificate_pair() {
    let prec = Precedence::chain(["1", "0"]);
    let tr = search_reduction(&t("1(0(0))"), &t("0(0(1(0)))"), &prec, Budget::default()).unwrap();
    validate_trace(&tr, &prec, Mode::Star).unwrap();
    assert!(search_reduction(&t("1(0)"), &t("1(0)"), &prec, Budget::default()).is_err());
}
