use clap::{Args, ValueEnum};
use pirlab::capacity::{c_byzantine, c_coded, c_colluding, c_mmpir, c_pir, c_spir, rd_costs};
use pirlab::{Error, Rate};

use crate::output::{compact, rational_and_decimal};
use crate::pruw_demo::parse_fraction;
use crate::CliResult;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Kind {
    Pir,
    Spir,
    Coded,
    Colluding,
    Byzantine,
    Mmpir,
    Rd,
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    kind: Kind,
    #[arg(long, default_value_t = 2)]
    n: u64,
    #[arg(long, default_value_t = 2)]
    k: u64,
    /// Storage code parameter (coded).
    #[arg(long, default_value_t = 1)]
    m: u64,
    /// Colluding databases.
    #[arg(long, default_value_t = 1)]
    t: u64,
    /// Byzantine databases.
    #[arg(long, default_value_t = 0)]
    b: u64,
    /// Messages retrieved at once (mmpir).
    #[arg(long, default_value_t = 1)]
    p: u64,
    /// Reading distortion budget.
    #[arg(long, default_value = "0")]
    dr: String,
    /// Reading cost without distortion.
    #[arg(long, default_value = "1")]
    c1: String,
    /// Writing distortion budget.
    #[arg(long, default_value = "0")]
    dw: String,
    /// Writing cost without distortion.
    #[arg(long, default_value = "1")]
    c2: String,
}

pub fn cmd_capacity(a: &CapacityArgs) -> CliResult {
    let value: pirlab::Result<Rate> = match a.kind {
        Kind::Pir => c_pir(a.n, a.k),
        Kind::Spir => c_spir(a.n),
        Kind::Coded => c_coded(a.n, a.k, a.m),
        Kind::Colluding => c_colluding(a.n, a.k, a.t),
        Kind::Byzantine => c_byzantine(a.n, a.k, a.t, a.b),
        Kind::Mmpir => c_mmpir(a.n, a.k, a.p),
        Kind::Rd => {
            let (cr, cw) = rd_costs(
                parse_fraction(&a.dr)?,
                parse_fraction(&a.dw)?,
                parse_fraction(&a.c1)?,
                parse_fraction(&a.c2)?,
            )?;
            println!("C_R={} C_W={}", compact(&cr), compact(&cw));
            return Ok(());
        }
    };
    match value {
        Ok(c) => println!("{}", rational_and_decimal(&c)),
        Err(Error::UncharacterizedRegime { k, p }) => {
            println!("uncharacterized regime (K={k}, P={p})");
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}
