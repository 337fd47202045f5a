#pragma once

// A two-metal technology with a 380-dbu site, shared by the parser, layout
// and metrics tests. def_with() wraps a DEF body in a 100x1-site floorplan.

#include <string>

namespace icas::test {

inline const char* kLef = R"(
VERSION 5.8 ;
UNITS
  DATABASE MICRONS 2000 ;
END UNITS
MANUFACTURINGGRID 0.005 ;
SITE core
  CLASS CORE ;
  SIZE 0.19 BY 1.71 ;
END core
LAYER poly
  TYPE MASTERSLICE ;
END poly
LAYER metal1
  TYPE ROUTING ;
  DIRECTION HORIZONTAL ;
  PITCH 0.19 ;
  WIDTH 0.07 ;
  SPACING 0.065 ;
END metal1
LAYER via1
  TYPE CUT ;
  WIDTH 0.07 ;
END via1
LAYER metal2
  TYPE ROUTING ;
  DIRECTION VERTICAL ;
  PITCH 0.19 ;
  WIDTH 0.07 ;
  SPACING 0.065 ;
END metal2
VIA via1_0 DEFAULT
  LAYER metal1 ;
    RECT -0.035 -0.035 0.035 0.035 ;
  LAYER via1 ;
    RECT -0.03 -0.03 0.03 0.03 ;
  LAYER metal2 ;
    RECT -0.035 -0.035 0.035 0.035 ;
END via1_0
MACRO NAND2
  CLASS CORE ;
  ORIGIN 0 0 ;
  SIZE 0.76 BY 1.71 ;
  SITE core ;
  SYMMETRY X Y ;
  PIN A
    DIRECTION INPUT ;
    USE SIGNAL ;
    PORT
      LAYER metal1 ;
        RECT 0.1 0.5 0.2 0.6 ;
    END
  END A
  OBS
    LAYER metal1 ;
      RECT 0 0 0.76 0.1 ;
  END
END NAND2
MACRO FILL1
  SIZE 0.19 BY 1.71 ;
END FILL1
END LIBRARY
)";

inline std::string def_with(const std::string& body) {
  return "VERSION 5.8 ;\nDESIGN t ;\nUNITS DISTANCE MICRONS 2000 ;\nDIEAREA ( 0 0 ) ( 38000 3420 ) ;\n"
         "ROW r0 core 0 0 N DO 100 BY 1 STEP 380 0 ;\n" +
         body + "END DESIGN\n";
}

}  // namespace icas::test
