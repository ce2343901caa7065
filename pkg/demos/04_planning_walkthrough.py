"""One planner invocation on the bundled scenario, action by action.

Run:  python demos/04_planning_walkthrough.py
"""
from scplan import evaluate_state, load_scenario
from scplan.experiment import plan_once
from scplan.presets import bundled_scenario_path

scn = load_scenario(bundled_scenario_path("urban200m"))
print(f"initial network: {len(scn.initial_state.cells)} cells, "
      f"{len(scn.candidate_sites)} candidate sites, "
      f"new tenant contracts {scn.event.tenant.contracted_capacity_mbps:.0f} Mbps "
      f"at step {scn.event.step}")

state, ledger, ctx = plan_once(scn, method="corr-px")

print(f"\nplanning actions ({len(ledger.raw_actions)} raw, "
      f"{len(ledger.actions)} after compression):")
for action in ledger.actions:
    print(f"  {action}")
for note in ledger.notes:
    print(f"  note: {note}")

ev = evaluate_state(state, ctx)
print("\nfinal layout under the planning estimate:")
bandwidth = scn.radio.channel_bandwidth_mhz
for cell in state.cells:
    required = ev.required_mhz[cell.cell_id]
    cap = scn.planner.alpha * len(cell.channels) * bandwidth
    print(f"  cell {cell.cell_id}: site {cell.site_pixel:4d} "
          f"channels {cell.channels} power {cell.power_dbm:5.1f} dBm "
          f"required {required:5.1f} MHz (bar {cap:4.1f})")
print(f"  total required: {ev.total_required():.1f} MHz")
