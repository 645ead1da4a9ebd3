//! The `field`, `channels` and `amplitude` subcommands.

use std::collections::BTreeSet;
use std::io::Write;

use serde_json::{json, Value};
use twistkit::fields::{electric_field, magnetic_field, vector_potential};
use twistkit::matrix_elements::{
    dipole_amplitude, spin_matrix_element, symbolic_channels, DipoleCoupling, SpinParticle,
};
use twistkit::{
    CenterOfMassState, Channel, ChannelOrder, Complex64, CylPoint, FieldSample, Interaction, InternalState, ModeSpec,
};

use crate::args::{AmplitudeArgs, ChannelsArgs, CmKind, FieldArgs, InteractionKind, TableFormat};
use crate::error::{CliError, CliResult};
use crate::table::{Cell, Table};

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn sample_json(s: &FieldSample) -> Value {
    json!({ "x": complex_json(s.x), "y": complex_json(s.y), "z": complex_json(s.z) })
}

fn mode_json(mode: &ModeSpec) -> Value {
    json!({
        "kind": mode.kind.to_string(),
        "m": mode.m,
        "k_perp": mode.k_perp,
        "k_z": mode.k_z,
        "omega": mode.omega(),
    })
}

pub fn field_report(args: &FieldArgs) -> CliResult<Value> {
    let mode = ModeSpec::new(args.kind, args.m, args.kperp, args.kz)?;
    mode.check()?;
    let [rho, phi, z, t] = args.at;
    let p = CylPoint::new(rho, phi, z, t)?;
    let a = vector_potential(&mode, &p)?;
    let e = electric_field(&mode, &p)?;
    let b = magnetic_field(&mode, &p)?;
    Ok(json!({
        "mode": mode_json(&mode),
        "point": { "rho": rho, "phi": phi, "z": z, "t": t },
        "A": sample_json(&a),
        "E": sample_json(&e),
        "B": sample_json(&b),
    }))
}

pub fn write_json<W: Write>(mut out: W, value: &Value) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::io("stdout", e.into()))?;
    writeln!(out).map_err(|e| CliError::io("stdout", e))
}

pub fn order_label(order: &ChannelOrder) -> String {
    match order {
        ChannelOrder::Dipole => "dipole".into(),
        ChannelOrder::Multipole { order } => format!("multipole:{order}"),
        ChannelOrder::Term { n, v, s } => format!("term:{n},{v},{s}"),
    }
}

pub const CHANNEL_COLUMNS: [&str; 7] =
    ["delta_m_cm", "delta_m_r", "delta_spin_e", "order", "component", "bessel_order", "total"];

pub fn channel_cells(c: &Channel) -> Vec<Cell> {
    vec![
        c.delta_m_cm.into(),
        c.delta_m_r.into(),
        c.delta_spin_e.into(),
        order_label(&c.order).into(),
        format!("{:?}", c.component).to_lowercase().into(),
        c.bessel_order.into(),
        c.total_change().into(),
    ]
}

pub fn interaction(kind: InteractionKind, n: u32, v: u32, s: u32) -> Interaction {
    match kind {
        InteractionKind::Dipole => Interaction::Dipole,
        InteractionKind::Spin => Interaction::Spin,
        InteractionKind::General => Interaction::General { n, v, s },
        InteractionKind::CenterOfMass => Interaction::CenterOfMass { n, v, s },
    }
}

pub fn channel_table(args: &ChannelsArgs) -> CliResult<Table> {
    let inter = interaction(args.interaction, args.n, args.v, args.s);
    let channels = symbolic_channels(args.m, args.kind, inter, args.max_multipole)?;
    let mut table = Table::new(CHANNEL_COLUMNS);
    for c in &channels {
        table.push(channel_cells(c));
    }
    Ok(table)
}

pub fn write_table<W: Write>(table: &Table, format: TableFormat, out: W) -> CliResult<()> {
    match format {
        TableFormat::Table => table.write_text(out),
        TableFormat::Csv => table.write_csv(out),
        TableFormat::Json => table.write_json(out),
    }
    .map_err(|e| CliError::io("stdout", e))
}

/// Hydrogenic level `-1 / (2 n^2)` in atomic units.
fn hydrogen_energy(n: u32) -> f64 {
    -0.5 / (n as f64 * n as f64)
}

pub fn amplitude_report(args: &AmplitudeArgs) -> CliResult<Value> {
    let mode = ModeSpec::new(args.kind, args.m, args.kperp, args.kz)?;
    mode.check()?;
    let (ni, li, mi) = args.initial;
    let (nf, lf, mf) = args.final_state;
    let int_in = InternalState::hydrogen(ni, li, mi)?;
    let int_out = InternalState::hydrogen(nf, lf, mf)?;
    let kz_out = args.kz_cm_out.unwrap_or(args.kz_cm_in - args.kz);
    let make_cm = |m_cm: i32, n_bar: u32, k_perp: f64, k_z: f64| match args.cm {
        CmKind::Trapped => CenterOfMassState::trapped(m_cm, n_bar, args.alpha, k_z),
        CmKind::Free => CenterOfMassState::free(m_cm, k_perp, k_z),
    };
    let cm_in = make_cm(args.mcm_in, args.nbar_in, args.kperp_cm_in, args.kz_cm_in)?;
    let inter = interaction(args.interaction, 0, 0, 0);
    let out_orders: BTreeSet<i32> = match args.mcm_out {
        Some(m) => [m].into(),
        None => symbolic_channels(args.m, args.kind, inter, 0)?.iter().map(|c| args.mcm_in + c.delta_m_cm).collect(),
    };
    let kperp_out = args.kperp_cm_out.unwrap_or(args.kperp_cm_in);
    let mut amplitudes = Vec::new();
    for m_out in out_orders {
        let cm_out = make_cm(m_out, args.nbar_out, kperp_out, kz_out)?;
        match args.interaction {
            InteractionKind::Dipole => {
                let gap = args.energy_gap.unwrap_or(hydrogen_energy(ni) - hydrogen_energy(nf));
                let coupling = DipoleCoupling { charge: args.charge, energy_gap: gap };
                amplitudes.extend(dipole_amplitude(&mode, &cm_in, &cm_out, &int_in, &int_out, &coupling)?);
            }
            InteractionKind::Spin => {
                let particle = SpinParticle { g: args.g, charge: args.charge, mass: args.mass };
                let amp = spin_matrix_element(
                    &mode,
                    &particle,
                    args.spin_in,
                    args.spin_out,
                    &cm_in,
                    &cm_out,
                    &int_in,
                    &int_out,
                )?;
                amplitudes.extend(amp);
            }
            other => {
                return Err(CliError::Usage(format!(
                    "amplitude supports the dipole and spin interactions, not {other:?}"
                )))
            }
        }
    }
    let rows: Vec<Value> = amplitudes
        .iter()
        .map(|a| {
            json!({
                "channel": a.channel,
                "order": order_label(&a.channel.order),
                "m_cm_out": args.mcm_in + a.channel.delta_m_cm,
                "amplitude": complex_json(a.amplitude),
                "cm_integral": complex_json(a.factors.cm_integral),
                "rel_integral": a.factors.rel_integral,
                "coupling": complex_json(a.factors.coupling),
                "axial": a.axial,
            })
        })
        .collect();
    Ok(json!({
        "mode": mode_json(&mode),
        "initial": { "internal": int_in.label, "cm": cm_in },
        "final_internal": int_out.label,
        "amplitudes": rows,
    }))
}
