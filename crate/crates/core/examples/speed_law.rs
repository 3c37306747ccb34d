//! The speed law of every vehicle kind for one hand-built situation.
//!
//!     cargo run --example speed_law

use stopgo::model::{desired_spacing, next_speed, ModelParams, NoiseModel, SpacingContext, VehicleKind};

fn main() -> stopgo::Result<()> {
    let params = ModelParams::default();
    println!("critical spacing {:.1} m", params.critical_spacing());
    for s in [7.5, 15.0, 22.0, 30.0, 45.0] {
        println!("V({s:>4}) = {:.4} m/s", params.equilibrium_speed(s));
    }

    // a vehicle at 22 m behind one at 30 m, in a platoon whose connected
    // vehicles report 18, 22 and 26 m and whose mean spacing is 25 m
    let connected = [18.0, 22.0, 26.0];
    let ctx = SpacingContext {
        own_spacing: 22.0,
        leader_spacing: Some(30.0),
        connected_spacings: &connected,
        mean_spacing: Some(25.0),
    };
    let z = 1.0;
    println!("\nkind  desired  v(z=0)   v(z=+1)  v(z=+1, speed noise)");
    for kind in VehicleKind::ALL {
        let speed_noise = params.with_noise_model(NoiseModel::SpeedPerUpdate);
        println!(
            "{:<5} {:>7.2}  {:>7.4}  {:>7.4}  {:>7.4}",
            kind,
            desired_spacing(kind, &ctx)?,
            next_speed(kind, &ctx, &params, 0.0)?,
            next_speed(kind, &ctx, &params, z)?,
            next_speed(kind, &ctx, &speed_noise, z)?,
        );
    }
    Ok(())
}
