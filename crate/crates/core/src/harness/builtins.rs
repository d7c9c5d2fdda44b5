//! Scenarios shipped with the crate and the `explain` texts.

use crate::error::{Error, Result};

use super::document::{parse_scenario, Scenario, TaskKind};

pub const BUILTINS: [(&str, &str); 6] = [
    ("product_lemma", include_str!("../../scenarios/product_lemma.scn")),
    ("mapping_torus", include_str!("../../scenarios/mapping_torus.scn")),
    ("gray_family", include_str!("../../scenarios/gray_family.scn")),
    ("fiber_sum_n1", include_str!("../../scenarios/fiber_sum_n1.scn")),
    ("fiber_sum_n2", include_str!("../../scenarios/fiber_sum_n2.scn")),
    ("negative_controls", include_str!("../../scenarios/negative_controls.scn")),
];

/// Source text of a built-in, by name with or without `.scn`.
pub fn builtin_source(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".scn").unwrap_or(name);
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load_builtin(name: &str) -> Result<Scenario> {
    let src = builtin_source(name)
        .ok_or_else(|| Error::spec(format!("no built-in scenario `{name}`")))?;
    parse_scenario(src, name.strip_suffix(".scn").unwrap_or(name))
}

pub fn explain(task: &str) -> Option<&'static str> {
    Some(match TaskKind::from_name(task)? {
        TaskKind::VerifyContact => {
            "verify_contact <form>\n\
             A 1-form α on a (2n+1)-dimensional chart is contact when α ∧ (dα)^n is a\n\
             positive multiple of the oriented volume form. The top coefficient is\n\
             divided by M^(n+1), M the largest coefficient of α over the grid, and\n\
             its minimum over the grid must exceed the threshold."
        }
        TaskKind::VerifyExactSymplectic => {
            "verify_exact_symplectic <form> [outward = [\"coord:min\", ...]]\n\
             β is exact symplectic when ω = dβ is nondegenerate: det of the matrix\n\
             ω_ij stays above the threshold after scaling. With outward faces, the\n\
             Liouville field χ solving ι_χ ω = β is computed pointwise and its normal\n\
             component must be positive on each listed boundary face."
        }
        TaskKind::Potential => {
            "potential <map> form = <β>\n\
             For a fiber map φ with φ*β − β closed, integrates φ*β − β along rays from a\n\
             basepoint to tabulate ψ with φ*β = β + dψ. The closedness residual and the\n\
             discrepancy of the integral around random closed polygons are reported;\n\
             either above tolerance means φ is not an exact symplectomorphism here."
        }
        TaskKind::Assemble => {
            "assemble <fibration> [K = k]\n\
             Builds σ = Kμ + β on each base piece times the fiber and\n\
             σ = Kμ + β + f dΨ on each collar, f a smooth cut-off equal to 1 near the\n\
             collar core and 0 near its ends, Ψ the transition potential. Checks that σ\n\
             is contact on every region and that dσ restricts to a symplectic form on\n\
             fiber slices, plus σ = Kμ + β near the fiber boundary when declared."
        }
        TaskKind::FindK => {
            "find_K <fibration> [max_k = m]\n\
             Large K makes the Kμ ∧ (K dμ)^n ∧ (dβ)^m term dominate the error terms\n\
             introduced by f dΨ. Doubles K from 1 until the assembled form passes,\n\
             then bisects geometrically to within a factor 1.1, and runs the assemble\n\
             checks at the K found."
        }
        TaskKind::Family => {
            "family <family>\n\
             A chart family αₜ is checked at evenly spaced t. For a base family μₜ on a\n\
             fibration, the isotopy Λₜ runs in three thirds: K rises from K0 to K with\n\
             μ₀ fixed, μₜ varies at fixed K, then K falls to K1 with μ₁ fixed. Every\n\
             member must be contact; the thirds must agree at t = 1/3 and 2/3 and the\n\
             ends must equal σ₀ and σ₁."
        }
        TaskKind::FiberSum => {
            "fiber_sum <sum>\n\
             Near a fiber, write the base form as dz + Σ r_k² dθ_k. The bundle map\n\
             Φ_F is (z, −r, θ) for odd n and (−z, r, −θ) for even n; for even n the\n\
             second side carries the reversed orientation and −μ. The annulus\n\
             ε/2 < |x| < √3ε/2 is glued by Υ(x) = √(ε² − |x|²)/|x| · Φ_F(x), which fixes\n\
             the sphere |x| = ε/√2. Checks Φ and Υ pointwise, that the pullback of σ₂\n\
             along Υ on that sphere equals σ₁, then assembles the summed fibration and\n\
             runs the find_K checks on it."
        }
    })
}
