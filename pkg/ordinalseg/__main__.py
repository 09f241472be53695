import sys

if __name__ == "__main__":
    from ordinalseg import main

    sys.exit(main())
