//! Minimum Green energy in the field of an external charge: QP solution,
//! closed form through the swept charge and the equilibrium measure, the
//! characterization inequalities and the dual problem.

use riesz_green::gauss::{self, characterization_residuals, dual_check, explicit_solution, solve_gauss, ExternalField};
use riesz_green::kernel::signed_energy_norm;
use riesz_green::verify::{hand_gauss_system, random_gauss_instance};
use riesz_green::Result;

fn main() -> Result<()> {
    let (gs, fld) = hand_gauss_system()?;
    let sol = solve_gauss(&gs, &fld)?;
    println!("hand instance: lambda = ({:.3}, {:.3}), c = {:.3}", sol.lambda.weight(0), sol.lambda.weight(1), sol.c_constant);

    let inst = random_gauss_instance(7, 2.0)?;
    let (gs, fld): (_, ExternalField) = (inst.gs, inst.fld);
    let qp = solve_gauss(&gs, &fld)?;
    let ex = explicit_solution(&gs, &fld)?;
    let gap = signed_energy_norm(gs.green(), &qp.lambda.minus(&ex.lambda)?)?;
    println!("random cap, |F| = {}: swept charge mass {:.4}", fld.f.len(), fld.theta_swept_mass());
    println!("  c: QP {:.10}, closed form {:.10}; lambda gap {gap:.2e}", qp.c_constant, ex.c_constant);
    let res = characterization_residuals(&gs, &fld, &qp.lambda)?;
    println!("  characterization residuals ({:.1e}, {:.1e})", res.lower_violation, res.upper_violation);
    let dual = dual_check(&gs, &fld)?;
    println!("  dual field: w gap {:.1e}, lambda gap {:.1e}", dual.w_gap, dual.lambda_gap);
    let m = gauss::bound_margins(&gs, &fld, &qp)?;
    println!("  bound margins: swept energy {:.4}, mass bound {:.4}", m.swept_energy, m.mass_bound);
    Ok(())
}
