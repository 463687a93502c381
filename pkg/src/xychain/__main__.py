from xychain.cli import main

main()
