/* Minimal C caller: model round trip, pause layer, error path. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "eflesh.h"

int main(void) {
    EfleshSensorModel *model = eflesh_sensor_model_default();
    double frame[EFLESH_CHANNELS];
    if (eflesh_forward_signal(model, -3.0, 5.0, 2.0, frame) != EFLESH_STATUS_OK) return 10;

    EfleshLocalization loc;
    if (eflesh_localize(model, frame, NULL, &loc) != EFLESH_STATUS_OK) return 11;
    if (fabs(loc.x + 3.0) > 1e-6 || fabs(loc.y - 5.0) > 1e-6 || fabs(loc.z - 2.0) > 1e-6) return 12;
    eflesh_sensor_model_free(model);

    uint32_t layer = 0;
    if (eflesh_pause_layer(13.6625, 0.2, &layer) != EFLESH_STATUS_OK || layer != 69) return 13;

    EfleshMesh *mesh = NULL;
    if (eflesh_mesh_load("does/not/exist.stl", EFLESH_MESH_FORMAT_AUTO, 1.0, &mesh) != EFLESH_STATUS_IO) return 14;
    if (mesh != NULL || eflesh_last_error() == NULL) return 15;

    printf("ok %s layer %u\n", eflesh_version(), layer);
    return 0;
}
