//! Post-encroachment time over the conflict zone.

use super::vehicle::VehicleId;
use serde::{Deserialize, Serialize};

/// One traversal of the conflict zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneEvent {
    pub vehicle: VehicleId,
    pub enter: f64,
    pub exit: Option<f64>,
}

/// PET for each consecutive pair (by entry time) of traversals by distinct
/// vehicles: entry of the later minus exit of the earlier. Open events are
/// ignored; overlapping occupancy yields no value.
pub fn compute_pet(events: &[ZoneEvent]) -> Vec<f64> {
    let mut closed: Vec<&ZoneEvent> = events.iter().filter(|e| e.exit.is_some()).collect();
    closed.sort_by(|a, b| a.enter.total_cmp(&b.enter).then(a.vehicle.cmp(&b.vehicle)));
    closed
        .windows(2)
        .filter(|w| w[0].vehicle != w[1].vehicle)
        .filter_map(|w| {
            let pet = w[1].enter - w[0].exit.unwrap_or(f64::INFINITY);
            (pet >= 0.0).then_some(pet)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(v: u32, enter: f64, exit: f64) -> ZoneEvent {
        ZoneEvent { vehicle: VehicleId(v), enter, exit: Some(exit) }
    }

    #[test]
    fn simple_gap() {
        let pets = compute_pet(&[ev(1, 6.0, 10.0), ev(2, 12.5, 15.0)]);
        assert_eq!(pets, vec![2.5]);
    }

    #[test]
    fn empty_and_single() {
        assert!(compute_pet(&[]).is_empty());
        assert!(compute_pet(&[ev(1, 1.0, 2.0)]).is_empty());
    }

    #[test]
    fn three_vehicles_two_pets() {
        // input order is irrelevant; consecutive by entry time
        let events = [ev(3, 20.0, 22.0), ev(1, 5.0, 8.0), ev(2, 10.0, 14.0)];
        let mut expected = Vec::new();
        let mut sorted = events.to_vec();
        sorted.sort_by(|a, b| a.enter.partial_cmp(&b.enter).unwrap());
        for i in 0..sorted.len() - 1 {
            expected.push(sorted[i + 1].enter - sorted[i].exit.unwrap());
        }
        assert_eq!(compute_pet(&events), expected);
        assert_eq!(expected, vec![2.0, 6.0]);
    }

    #[test]
    fn same_vehicle_reentry_skipped() {
        assert!(compute_pet(&[ev(1, 1.0, 2.0), ev(1, 3.0, 4.0)]).is_empty());
    }

    #[test]
    fn overlap_excluded() {
        assert!(compute_pet(&[ev(1, 1.0, 5.0), ev(2, 3.0, 6.0)]).is_empty());
    }
}
