from catutil.cli import main

main()
