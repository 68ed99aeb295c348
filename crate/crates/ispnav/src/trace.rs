//! CSV trace output. Floats carry nine significant digits; `+inf` prints as `inf`.

use std::io::{self, Write};

use ispnav_core::TraceRecord;

use crate::numfmt;

pub const HEADER: &str = "step,time,agent,x,y,heading,speed,steer_cmd,accel_scaled,accel_ms2,min_tau,safe_cols,accel_lo,accel_hi,min_sep,collided";

pub const SIGNIFICANT_DIGITS: usize = 9;

pub fn format_record(r: &TraceRecord) -> String {
    let f = |v: f64| numfmt::sig(v, SIGNIFICANT_DIGITS);
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.step,
        f(r.time),
        r.agent,
        f(r.position.x),
        f(r.position.y),
        f(r.heading),
        f(r.speed),
        f(r.steer_cmd),
        f(r.accel_scaled),
        f(r.accel_ms2),
        f(r.min_tau.get()),
        r.safe_cols,
        f(r.accel_interval.lo),
        f(r.accel_interval.hi),
        f(r.min_sep),
        u8::from(r.collided),
    )
}

pub fn write_header<W: Write>(mut out: W) -> io::Result<()> {
    writeln!(out, "{HEADER}")
}

pub fn write_records<'a, W, I>(mut out: W, records: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a TraceRecord>,
{
    for r in records {
        writeln!(out, "{}", format_record(r))?;
    }
    Ok(())
}

/// Header plus every record.
pub fn write_trace<'a, W, I>(mut out: W, records: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a TraceRecord>,
{
    write_header(&mut out)?;
    write_records(out, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ispnav_core::camera::Point2;
    use ispnav_core::{AccelInterval, ExtendedReal};

    #[test]
    fn row_layout() {
        let r = TraceRecord {
            step: 3,
            time: 0.04,
            agent: 7,
            position: Point2::new(1.0 / 3.0, -2.5),
            heading: 0.0,
            speed: 15.0,
            steer_cmd: -0.003125,
            accel_scaled: -1.0,
            accel_ms2: -5.0,
            min_tau: ExtendedReal::INFINITY,
            safe_cols: 320,
            accel_interval: AccelInterval::BRAKE,
            min_sep: 77.0,
            collided: false,
        };
        assert_eq!(
            format_record(&r),
            "3,0.04,7,0.333333333,-2.5,0,15,-0.003125,-1,-5,inf,320,-1,0,77,0"
        );
        let mut buf = Vec::new();
        write_trace(&mut buf, [&r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some(HEADER));
        assert_eq!(text.lines().count(), 2);
        assert_eq!(HEADER.split(',').count(), format_record(&r).split(',').count());
    }
}
