from bitensionlab.cli import main

raise SystemExit(main())
