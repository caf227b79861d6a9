from dropmix.cli import main

raise SystemExit(main())
