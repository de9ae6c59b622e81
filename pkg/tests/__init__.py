# Tests package for the edge-triangle laboratory
