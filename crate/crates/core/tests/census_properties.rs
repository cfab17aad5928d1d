use mukai_core::census::{run_census, CensusBounds, CensusRow};
use mukai_core::{NSClass, ReductionConfig, SurfaceContext};

fn rows(bounds: CensusBounds, ctx: &SurfaceContext) -> Vec<CensusRow> {
    let mut out = Vec::new();
    run_census(&bounds, ctx, &ReductionConfig::default(), |r| {
        out.push(r.clone());
        Ok(())
    })
    .unwrap();
    out
}

fn nodal() -> SurfaceContext {
    SurfaceContext::nodal(vec![
        NSClass::root(3),
        NSClass::new(1, -1, Default::default()),
    ])
}

#[test]
fn torsion_bit_matters_only_in_sensitive_cases() {
    for ctx in [SurfaceContext::unnodal(), nodal()] {
        let all = rows(CensusBounds::new(4, 4, 1).unwrap(), &ctx);
        // Rows come in κ = 0, 1 pairs.
        for pair in all.chunks_exact(2) {
            let (a, b) = (&pair[0], &pair[1]);
            assert_eq!(a.vector.with_kappa(true), b.vector);
            if a.verdict.nonempty != b.verdict.nonempty {
                let sensitive = (a.ell == 2 && a.square == 0) || (ctx.nodal && a.square == -2);
                assert!(sensitive, "{} vs {}", a.vector, b.vector);
            }
        }
    }
}

#[test]
fn canonical_summaries_match_rows() {
    for row in rows(
        CensusBounds::new(6, 4, 1).unwrap(),
        &SurfaceContext::unnodal(),
    ) {
        let r = row.vector.r();
        if row.primitive && r > 0 {
            let c = row
                .canonical
                .as_ref()
                .unwrap_or_else(|| panic!("{} not reduced", row.vector));
            assert_eq!(c.ell, row.ell);
            let (cr, cs) = (
                c.vector["r"].as_i64().unwrap(),
                c.vector["s"].as_i64().unwrap(),
            );
            assert_eq!(cr, if r % 2 == 0 { 2 } else { 1 });
            let c1: Vec<i64> = serde_json::from_value(c.vector["c1"].clone()).unwrap();
            let class = NSClass::from_coords(c1.try_into().unwrap());
            assert_eq!(
                class.square().unwrap() + cr * cs,
                row.square,
                "{}",
                row.vector
            );
        } else {
            assert!(row.canonical.is_none());
        }
        assert!(row.reduction_error.is_none());
    }
}

#[test]
fn census_output_is_reproducible() {
    let b = CensusBounds::new(3, 3, 1).unwrap();
    let render = || {
        rows(b, &nodal())
            .iter()
            .map(|r| r.to_json().to_string())
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(render(), render());
}
