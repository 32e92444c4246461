/* SPDX-License-Identifier: Apache-2.0 */
#include <stdio.h>
#include <string.h>
#include "sfrviz.h"

static const char DIAMOND[] =
    "{\"root\":0,\"nodes\":["
    "{\"id\":0,\"method\":\"m\",\"index\":0,\"text\":\"cond\"},"
    "{\"id\":1,\"method\":\"m\",\"index\":1,\"text\":\"t\"},"
    "{\"id\":2,\"method\":\"m\",\"index\":2,\"text\":\"f\"},"
    "{\"id\":3,\"method\":\"m\",\"index\":3,\"text\":\"j\"}],"
    "\"edges\":[{\"src\":0,\"dst\":[1,2]},{\"src\":1,\"dst\":[3]},{\"src\":2,\"dst\":[3]}]}";

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s\n", #cond); return 1; } } while (0)

int main(void) {
    SfrvizGraph *g = NULL;
    CHECK(sfrviz_graph_load((const uint8_t *)DIAMOND, strlen(DIAMOND), &g) == SFRVIZ_STATUS_OK);
    size_t n = 0;
    CHECK(sfrviz_graph_node_count(g, &n) == SFRVIZ_STATUS_OK && n == 4);

    SfrvizNumbering *num = NULL;
    CHECK(sfrviz_number(g, SFRVIZ_TRAVERSAL_SFR, &num) == SFRVIZ_STATUS_OK);
    uint32_t k = 0;
    CHECK(sfrviz_numbering_get(num, 2, &k) == SFRVIZ_STATUS_OK && k == 3);
    CHECK(sfrviz_numbering_get(num, 9, &k) == SFRVIZ_STATUS_NOT_FOUND);
    sfrviz_numbering_free(num);

    SfrvizView *v = NULL;
    CHECK(sfrviz_view_render(g, false, &v) == SFRVIZ_STATUS_OK);
    SfrvizCell cell;
    CHECK(sfrviz_view_cell(v, 2, &cell) == SFRVIZ_STATUS_OK);
    CHECK(cell.lane == 1 && cell.depth == 1 && cell.sfr == 3);
    char *json = NULL;
    CHECK(sfrviz_view_layout_json(v, &json) == SFRVIZ_STATUS_OK && strstr(json, "\"revision\":0") != NULL);
    sfrviz_string_free(json);
    sfrviz_view_free(v);
    sfrviz_graph_free(g);

    CHECK(sfrviz_graph_load((const uint8_t *)"{}", 2, &g) == SFRVIZ_STATUS_MALFORMED_GRAPH);
    CHECK(g == NULL);
    CHECK(strstr(sfrviz_last_error(), "missing root") != NULL);
    printf("ok\n");
    return 0;
}
