//! Two-user ray channel through +/-5 degree beams: magnitude of the reduced
//! channel across the band, with and without the front-end impairments.

use mmwave_hbf::array::{build_analog_precoder, steering_vector, ArrayGeometry, SteeringAngles};
use mmwave_hbf::block::FFT_SIZE;
use mmwave_hbf::channel::{
    apply_impairments, generate_channel, reduce_channel, BsLayout, ChannelScenario, ImpairmentProfile, Ray,
    UserPropagation,
};
use num_complex::Complex64;

fn ray(aod: f64, aoa: f64, gain_db: f64, delay: usize) -> mmwave_hbf::Result<Ray> {
    Ok(Ray {
        aod: SteeringAngles::azimuth(aod)?,
        aoa: SteeringAngles::azimuth(aoa)?,
        gain: Complex64::new(10f64.powf(gain_db / 20.0), 0.0),
        delay,
    })
}

fn main() -> mmwave_hbf::Result<()> {
    let ue = ArrayGeometry::new(2, 2)?;
    let scenario = ChannelScenario {
        bs: BsLayout::paper_default(),
        ue,
        users: vec![
            UserPropagation {
                rays: vec![ray(5.0, -5.0, 0.0, 0)?, ray(-20.0, 15.0, -6.0, 9)?],
                scatterers: None,
            },
            UserPropagation {
                rays: vec![ray(-5.0, 5.0, 0.0, 0)?, ray(30.0, -10.0, -8.0, 23)?],
                scatterers: None,
            },
        ],
    };
    let raw = generate_channel(&scenario, 1)?;
    let impaired = apply_impairments(
        &raw,
        &ImpairmentProfile {
            edge_rolloff_db: 6.0,
            chain_power_imbalance_db: vec![0.0, -1.0],
            noise_power: 0.0,
        },
    )?;
    println!("checksum {}", raw.checksum());

    let g = ArrayGeometry::new(8, 2)?;
    let f_a = build_analog_precoder(vec![
        steering_vector(&g, SteeringAngles::azimuth(5.0)?)?,
        steering_vector(&g, SteeringAngles::azimuth(-5.0)?)?,
    ])?;
    let w = vec![
        steering_vector(&ue, SteeringAngles::azimuth(-5.0)?)?,
        steering_vector(&ue, SteeringAngles::azimuth(5.0)?)?,
    ];
    let clean = reduce_channel(&raw, &f_a, &w)?;
    let rough = reduce_channel(&impaired, &f_a, &w)?;
    println!("k,h00,h01,h00_impaired,h01_impaired");
    for k in (0..FFT_SIZE).step_by(32) {
        let (c, r) = (clean.at(k), rough.at(k));
        println!(
            "{k},{:.2},{:.2},{:.2},{:.2}",
            c[(0, 0)].norm(),
            c[(0, 1)].norm(),
            r[(0, 0)].norm(),
            r[(0, 1)].norm()
        );
    }
    Ok(())
}
