//! Beam pattern of a 2x8 sub-array steered to 5 degrees, with 2-, 4- and
//! 8-bit phase shifters.

use mmwave_hbf::array::{array_factor, quantize_phases, steering_vector, ArrayGeometry, SteeringAngles};

fn main() -> mmwave_hbf::Result<()> {
    let g = ArrayGeometry::new(8, 2)?;
    let ideal = steering_vector(&g, SteeringAngles::azimuth(5.0)?)?;
    let variants = [
        ("ideal", ideal.clone()),
        ("8-bit", quantize_phases(&ideal, 8)?),
        ("4-bit", quantize_phases(&ideal, 4)?),
        ("2-bit", quantize_phases(&ideal, 2)?),
    ];
    println!(
        "phi_deg,{}",
        variants.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(",")
    );
    for phi in (-60..=60).step_by(5) {
        let dir = SteeringAngles::azimuth(phi as f64)?;
        let row: Vec<String> = variants
            .iter()
            .map(|(_, w)| array_factor(&g, w, dir).map(|af| format!("{:.3}", af.norm())))
            .collect::<mmwave_hbf::Result<_>>()?;
        println!("{phi},{}", row.join(","));
    }
    Ok(())
}
