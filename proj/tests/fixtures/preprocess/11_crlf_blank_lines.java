class K {

    int a;   
  	 
    // c
    int b;
}

