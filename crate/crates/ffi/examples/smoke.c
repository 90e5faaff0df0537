/* Load a scenario, run a small ensemble and print the CO2 mean per slot. */
#include <stdio.h>

#include "occusim.h"

int main(int argc, char **argv) {
    if (argc < 2) {
        fprintf(stderr, "usage: %s scenario.json\n", argv[0]);
        return 2;
    }
    OccusimScenario *scenario = NULL;
    if (occusim_scenario_load(argv[1], &scenario) != OCCUSIM_STATUS_OK) {
        fprintf(stderr, "%s\n", occusim_last_error_message());
        return 1;
    }
    OccusimAggregate *agg = NULL;
    if (occusim_monte_carlo(scenario, 20, 42, &agg) != OCCUSIM_STATUS_OK) {
        fprintf(stderr, "%s\n", occusim_last_error_message());
        occusim_scenario_free(scenario);
        return 1;
    }
    size_t slots = 0;
    occusim_aggregate_slot_count(agg, &slots);
    for (size_t i = 0; i < slots; i++) {
        uint32_t hour = 0;
        OccusimCo2Stats stats;
        occusim_aggregate_slot_hour(agg, i, &hour);
        occusim_aggregate_co2_stats(agg, i, &stats);
        printf("%u %.1f\n", hour, stats.mean);
    }
    occusim_aggregate_free(agg);
    occusim_scenario_free(scenario);
    return 0;
}
